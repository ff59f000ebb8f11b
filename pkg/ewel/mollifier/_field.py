# MollifiedField: a CoefficientField built from a base field and a mollification radius.

from enum import Enum
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline

from ..coefficients import CoefficientField, Evaluator
from ..exceptions import ArgumentError


class MollifyMethod(str, Enum):
    HOLDER_CONVOLUTION = "holder_convolution"
    PIECEWISE_BLEND = "piecewise_blend"


# sup |b_eps| <= BLEND_SLACK * K1 for the two-sided blend (interior weights reach ~1.84)
BLEND_SLACK = 2.0


class MollifiedField(CoefficientField):
    """Regularized coefficients (b_eps, sigma_eps) of ``base``.

    Behaves as an ordinary :class:`CoefficientField`, so simulation and validation take it
    unchanged. Declared constants are the base ones, with the drift bound doubled for the
    piecewise blend.
    """

    __slots__ = ("base", "epsilon", "method", "quadrature_nodes", "horizon")

    def __init__(
        self,
        base: CoefficientField,
        epsilon: float,
        method: MollifyMethod,
        drift_eval: Evaluator,
        sigma_eval: Evaluator,
        quadrature_nodes: int,
        horizon: Optional[float] = None,
    ) -> None:
        method = MollifyMethod(method)
        k1 = base.k1 * (BLEND_SLACK if method is MollifyMethod.PIECEWISE_BLEND else 1.0)
        super().__init__(
            name=f"{base.name}[eps={epsilon:g}]",
            drift_eval=drift_eval,
            sigma_eval=sigma_eval,
            dim=base.dim,
            regime=base.regime,
            gamma=base.gamma,
            k1=k1,
            k2=base.k2,
            lam=base.lam,
            discontinuities=base.discontinuities,
            time_dependent=base.time_dependent,
            state_free_sigma=base.state_free_sigma,
            params=dict(
                base.params,
                epsilon=float(epsilon),
                method=method.value,
                quadrature_nodes=int(quadrature_nodes),
                horizon=horizon,
            ),
        )
        self.base = base
        self.epsilon = float(epsilon)
        self.method = method
        self.quadrature_nodes = int(quadrature_nodes)
        self.horizon = horizon

    @property
    def quadrature_rule(self) -> str:
        return "gauss-legendre"

    def tabulated(self, n_per_eps: int = 40, radius: float = 6.0) -> CoefficientField:
        """Cubic-spline table of b_eps and sigma_eps on [-radius, radius] with spacing eps/n_per_eps.

        Only for 1D time-independent fields; points outside the table use the direct evaluators.
        """
        if self.dim != 1 or self.time_dependent:
            raise ArgumentError(
                "tabulation needs a one-dimensional time-independent field",
                context={"model": self.name, "dim": self.dim},
            )
        if n_per_eps < 4:
            raise ArgumentError(f"n_per_eps must be >= 4, got {n_per_eps}")
        step = self.epsilon / n_per_eps
        n = int(np.ceil(2.0 * radius / step)) + 1
        knots = np.linspace(-radius, radius, n)
        pts = knots.reshape(-1, 1)
        drift = SplineEvaluator(knots, self.drift(0.0, pts)[:, 0], self.drift_eval)
        sigma = SplineEvaluator(knots, self.sigma(0.0, pts)[:, 0, 0], self.sigma_eval)
        return CoefficientField(
            name=f"{self.name}:tabulated",
            drift_eval=drift,
            sigma_eval=sigma,
            dim=1,
            regime=self.regime,
            gamma=self.gamma,
            k1=self.k1,
            k2=self.k2,
            lam=self.lam,
            discontinuities=self.discontinuities,
            time_dependent=False,
            state_free_sigma=self.state_free_sigma,
            params=dict(self.params, tabulated=n_per_eps, table_radius=float(radius)),
        )


class SplineEvaluator:
    """Scalar 1D evaluator backed by a cubic spline, with a direct fallback off the table."""

    def __init__(self, knots: np.ndarray, values: np.ndarray, fallback: Evaluator) -> None:
        self.lo = float(knots[0])
        self.hi = float(knots[-1])
        self.spline = CubicSpline(knots, values)
        self.fallback = fallback

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        z = x[:, 0]
        inside = (z >= self.lo) & (z <= self.hi)
        out = np.empty(z.shape[0])
        out[inside] = self.spline(z[inside])
        if not inside.all():
            out[~inside] = np.asarray(self.fallback(t, x[~inside]), dtype=float).reshape(-1)
        return out
