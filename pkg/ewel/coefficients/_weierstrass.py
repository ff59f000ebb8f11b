# Truncated Weierstrass series and its periodic lookup table.

import logging
from typing import Any, Optional

import numpy as np

from ..exceptions import ArgumentError

logger = logging.getLogger(__name__)

# Table size cap; larger requests fall back to summing the series directly.
MAX_TABLE_NODES = 1 << 22
NODES_PER_OSCILLATION = 8


def _check(gamma: float, base: int, n_terms: int) -> None:
    if n_terms < 1:
        raise ArgumentError(f"n_terms must be >= 1, got {n_terms}")
    if int(base) != base or base < 2:
        raise ArgumentError(f"base must be an integer >= 2, got {base}")
    if not 0.0 < gamma <= 1.0:
        raise ArgumentError(f"gamma must lie in (0, 1], got {gamma}")


def weierstrass(x: Any, gamma: float, base: int = 2, n_terms: int = 16) -> Any:
    """Sum_{k < n_terms} base^(-gamma k) cos(base^k pi x), elementwise."""
    _check(gamma, base, n_terms)
    arr = np.asarray(x, dtype=float)
    total = np.zeros_like(arr)
    for k in range(n_terms):
        total += float(base) ** (-gamma * k) * np.cos(float(base) ** k * np.pi * arr)
    return float(total) if total.ndim == 0 else total


def weierstrass_sup(gamma: float, base: int = 2, n_terms: int = 16) -> float:
    """W(0), the maximum of the truncated series."""
    _check(gamma, base, n_terms)
    return float(sum(float(base) ** (-gamma * k) for k in range(n_terms)))


class WeierstrassTable:
    """W tabulated on one period [0, 2) and read back by periodic linear interpolation.

    Integer bases make every term 2-periodic. The node spacing resolves the finest term
    with ``NODES_PER_OSCILLATION`` nodes per period.
    """

    __slots__ = ("gamma", "base", "n_terms", "nodes", "values")

    PERIOD = 2.0

    def __init__(self, gamma: float, base: int = 2, n_terms: int = 16) -> None:
        _check(gamma, base, n_terms)
        self.gamma = float(gamma)
        self.base = int(base)
        self.n_terms = int(n_terms)
        count = NODES_PER_OSCILLATION * self.base ** (self.n_terms - 1)
        count = max(count, 1024)
        if count > MAX_TABLE_NODES:
            raise ArgumentError(
                f"table would need {count} nodes (cap {MAX_TABLE_NODES})",
                context={"base": self.base, "n_terms": self.n_terms},
            )
        self.nodes = np.arange(count, dtype=float) * (self.PERIOD / count)
        self.values = weierstrass(self.nodes, self.gamma, self.base, self.n_terms)
        logger.debug("Weierstrass table built with %d nodes", count)

    def __call__(self, x: Any) -> np.ndarray:
        return np.interp(np.asarray(x, dtype=float), self.nodes, self.values, period=self.PERIOD)


def weierstrass_table(gamma: float, base: int = 2, n_terms: int = 16) -> Optional[WeierstrassTable]:
    """Build a lookup table, or ``None`` when the series is too fine to tabulate."""
    try:
        return WeierstrassTable(gamma, base, n_terms)
    except ArgumentError:
        _check(gamma, base, n_terms)
        return None
