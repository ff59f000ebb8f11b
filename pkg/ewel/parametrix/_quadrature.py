# Quadrature rules for the space-time convolutions of the parametrix series.

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.special import erfc

from ..exceptions import ConfigurationError

MAX_MASS_LOSS = 1e-6


@dataclass(frozen=True)
class QuadratureConfig:
    """Node counts and truncation of the series quadrature.

    ``time_nodes``/``space_nodes`` drive each convolution; ``table_*`` size the grids on
    which the iterated terms are stored between levels.
    """

    time_nodes: int = 64
    space_nodes: int = 48
    truncation_sd: float = 6.0
    table_time_nodes: int = 32
    table_space_nodes: int = 129
    covariance_nodes: int = 16
    hermite_nodes: int = 20

    def __post_init__(self) -> None:
        loss = float(erfc(self.truncation_sd / math.sqrt(2.0)))
        if loss > MAX_MASS_LOSS:
            raise ConfigurationError(
                f"truncation at {self.truncation_sd:g} standard deviations loses {loss:.2e} "
                f"of Gaussian mass (limit {MAX_MASS_LOSS:g})",
                context={"field": "parametrix.truncation_sd"},
            )
        for name in ("time_nodes", "space_nodes", "table_time_nodes", "covariance_nodes", "hermite_nodes"):
            if getattr(self, name) < 4:
                raise ConfigurationError(f"{name} must be >= 4, got {getattr(self, name)}")
        if self.table_space_nodes < 9:
            raise ConfigurationError(f"table_space_nodes must be >= 9, got {self.table_space_nodes}")

    def for_dim(self, dim: int) -> "QuadratureConfig":
        """Two-dimensional grids are tensor products; scale node counts down to desk size."""
        if dim == 1:
            return self
        return replace(
            self,
            time_nodes=min(self.time_nodes, 24),
            space_nodes=min(self.space_nodes, 16),
            table_time_nodes=min(self.table_time_nodes, 12),
            table_space_nodes=min(self.table_space_nodes, 25),
        )

    def key(self) -> Tuple:
        return (
            self.time_nodes,
            self.space_nodes,
            self.truncation_sd,
            self.table_time_nodes,
            self.table_space_nodes,
            self.covariance_nodes,
            self.hermite_nodes,
        )


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def grading_power(gamma: float) -> int:
    return max(2, math.ceil(2.0 / gamma) + 1)


@lru_cache(maxsize=None)
def graded_unit_rule(n: int, gamma: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes in (0, 1) clustered at both ends, tau = w^p / (w^p + (1-w)^p).

    The power p grows as gamma shrinks so an endpoint factor (1-tau)^{gamma/2 - 1} becomes
    a smooth integrand in w.
    """
    p = grading_power(gamma)
    g, wg = gauss_legendre(n)
    w = 0.5 * (g + 1.0)
    num, other = w**p, (1.0 - w) ** p
    den = num + other
    tau = num / den
    jac = p * w ** (p - 1) * (1.0 - w) ** (p - 1) / den**2
    return tau, 0.5 * wg * jac


def graded_time_rule(s: float, t: float, n: int, gamma: float) -> Tuple[np.ndarray, np.ndarray]:
    tau, w = graded_unit_rule(n, float(gamma))
    return s + (t - s) * tau, (t - s) * w


@lru_cache(maxsize=None)
def tensor_unit_rule(n: int, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss-Legendre nodes (n^dim, dim) and weights on [-1, 1]^dim."""
    g, w = gauss_legendre(n)
    grids = np.meshgrid(*([g] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    nodes = np.stack([a.reshape(-1) for a in grids], axis=1)
    weights = np.prod(np.stack([a.reshape(-1) for a in wgrids], axis=1), axis=1)
    return nodes, weights


@lru_cache(maxsize=None)
def hermite_rule(n: int, dim: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for E[f(G)], G standard normal in R^dim."""
    g, w = np.polynomial.hermite_e.hermegauss(n)
    w = w / w.sum()
    grids = np.meshgrid(*([g] * dim), indexing="ij")
    wgrids = np.meshgrid(*([w] * dim), indexing="ij")
    nodes = np.stack([a.reshape(-1) for a in grids], axis=1)
    weights = np.prod(np.stack([a.reshape(-1) for a in wgrids], axis=1), axis=1)
    return nodes, weights
