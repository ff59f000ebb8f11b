"""Coefficient fields (b, sigma) with their declared regime and bounds."""

from enum import Enum
from typing import Any, Callable, Dict, Optional

import numpy as np

from ..exceptions import ConfigurationError
from ._manifolds import DiscontinuitySet, as_points

Evaluator = Callable[[float, np.ndarray], np.ndarray]


class Regime(str, Enum):
    HOLDER = "holder"
    PIECEWISE_SMOOTH = "piecewise_smooth"


class CoefficientField:
    """A drift/diffusion pair evaluated on batches of points at a scalar time.

    Evaluators receive ``(t, x)`` with ``x`` of shape ``(n, dim)``. Drift returns
    ``(n, dim)``; sigma returns ``(n, dim, dim)``, a diagonal ``(n, dim)`` or, in 1D, ``(n,)``.
    Fields are immutable after construction and safe to share between workers.
    """

    __slots__ = (
        "name",
        "drift_eval",
        "sigma_eval",
        "dim",
        "regime",
        "gamma",
        "k1",
        "k2",
        "lam",
        "discontinuities",
        "time_dependent",
        "state_free_sigma",
        "params",
    )

    def __init__(
        self,
        name: str,
        drift_eval: Evaluator,
        sigma_eval: Evaluator,
        dim: int,
        regime: Regime = Regime.HOLDER,
        gamma: float = 1.0,
        k1: float = 1.0,
        k2: float = 1.0,
        lam: float = 1.0,
        discontinuities: Optional[DiscontinuitySet] = None,
        time_dependent: bool = False,
        state_free_sigma: bool = False,
        params: Optional[Dict[str, Any]] = None,
    ) -> None:
        if dim not in (1, 2, 3):
            raise ConfigurationError(f"dim must be 1, 2 or 3, got {dim}")
        regime = Regime(regime)
        if not 0.0 < gamma <= 1.0:
            raise ConfigurationError(f"Hölder exponent must lie in (0, 1], got {gamma}")
        if lam < 1.0:
            raise ConfigurationError(f"ellipticity constant must be >= 1, got {lam}")
        if regime is Regime.PIECEWISE_SMOOTH:
            if discontinuities is None:
                raise ConfigurationError(f"piecewise-smooth model {name!r} needs a discontinuity set")
            if discontinuities.dim != dim:
                raise ConfigurationError(
                    f"discontinuity set of dim {discontinuities.dim} for a {dim}-dimensional field"
                )
        elif discontinuities is not None:
            raise ConfigurationError(f"Hölder model {name!r} cannot carry discontinuities")
        self.name = name
        self.drift_eval = drift_eval
        self.sigma_eval = sigma_eval
        self.dim = dim
        self.regime = regime
        self.gamma = float(gamma) if regime is Regime.HOLDER else 1.0
        self.k1 = float(k1)
        self.k2 = float(k2)
        self.lam = float(lam)
        self.discontinuities = discontinuities
        self.time_dependent = bool(time_dependent)
        self.state_free_sigma = bool(state_free_sigma)
        self.params = dict(params or {})

    def drift(self, t: float, x: Any) -> np.ndarray:
        pts = as_points(x, self.dim)
        out = np.asarray(self.drift_eval(float(t), pts), dtype=float)
        return out.reshape(pts.shape[0], self.dim)

    def sigma(self, t: float, x: Any) -> np.ndarray:
        pts = as_points(x, self.dim)
        out = np.asarray(self.sigma_eval(float(t), pts), dtype=float)
        n, d = pts.shape
        if out.shape == (n, d, d):
            return out
        if out.size == n * d:
            # diagonal (or scalar 1D) return value
            diag = out.reshape(n, d)
            full = np.zeros((n, d, d))
            idx = np.arange(d)
            full[:, idx, idx] = diag
            return full
        raise ConfigurationError(
            f"sigma of model {self.name!r} returned shape {out.shape} for {n} points in dim {d}"
        )

    def diffusion(self, t: float, x: Any) -> np.ndarray:
        """a = sigma sigma^T, shape ``(n, dim, dim)``."""
        s = self.sigma(t, x)
        return np.einsum("nij,nkj->nik", s, s)

    def describe(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "name": self.name,
            "dim": self.dim,
            "regime": self.regime.value,
            "gamma": self.gamma,
            "k1": self.k1,
            "k2": self.k2,
            "lambda": self.lam,
            "params": self.params,
        }
        if self.discontinuities is not None:
            out["discontinuities"] = self.discontinuities.describe()
        return out

    def __repr__(self) -> str:
        return f"CoefficientField(name={self.name!r}, dim={self.dim}, regime={self.regime.value})"
