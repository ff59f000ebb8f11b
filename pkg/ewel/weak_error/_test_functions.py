# Test functions for weak errors: Hölder closed forms, indicators of a level-set domain
# A = {d_S >= 0}, their C^2 bump-smoothed versions f_delta and a growing indicator.

from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from ..coefficients import Manifold, as_points, make_manifold
from ..exceptions import ConfigurationError


class TestFunctionKind(str, Enum):
    __test__ = False

    HOLDER = "holder"
    INDICATOR = "indicator"
    SMOOTH_INDICATOR = "smooth_indicator"
    EXP_INDICATOR = "exp_indicator"


HOLDER_FORMS = ("cos", "abs_power", "identity")


class TestFunction:
    """A scalar function of the terminal state, evaluated on ``(n, dim)`` batches."""

    __test__ = False
    __slots__ = ("kind", "dim", "form", "beta", "domain", "delta", "radius", "rate")

    def __init__(
        self,
        kind: TestFunctionKind,
        dim: int = 1,
        form: str = "cos",
        beta: float = 1.0,
        domain: Optional[Manifold] = None,
        delta: float = 0.0,
        radius: float = 1.0,
        rate: float = 1.0,
    ) -> None:
        self.kind = TestFunctionKind(kind)
        self.dim = int(dim)
        self.form = form
        self.beta = float(beta)
        self.domain = domain
        self.delta = float(delta)
        self.radius = float(radius)
        self.rate = float(rate)
        if self.kind is TestFunctionKind.HOLDER:
            if form not in HOLDER_FORMS:
                raise ConfigurationError(f"unknown Hölder form {form!r}; expected one of {list(HOLDER_FORMS)}")
            if not 0.0 < self.beta <= 1.0:
                raise ConfigurationError(f"Hölder exponent must lie in (0, 1], got {beta}")
        if self.kind in (TestFunctionKind.INDICATOR, TestFunctionKind.SMOOTH_INDICATOR):
            if domain is None:
                raise ConfigurationError(f"{self.kind.value} test function needs a domain")
            if domain.dim != self.dim:
                raise ConfigurationError(f"domain of dim {domain.dim} for a {self.dim}-dimensional test function")
        if self.kind is TestFunctionKind.SMOOTH_INDICATOR:
            if not self.delta > 0.0:
                raise ConfigurationError(f"smoothing width must be positive, got {delta}")
            if self.delta >= domain.reach():
                raise ConfigurationError(
                    f"smoothing width {self.delta} is not below the reach {domain.reach()} of the domain"
                )

    @property
    def label(self) -> str:
        if self.kind is TestFunctionKind.HOLDER:
            return self.form if self.form != "abs_power" else f"abs_power(beta={self.beta:g})"
        if self.kind is TestFunctionKind.INDICATOR:
            return f"indicator({self.domain.kind})"
        if self.kind is TestFunctionKind.SMOOTH_INDICATOR:
            return f"smooth_indicator({self.domain.kind},delta={self.delta:g})"
        return f"exp_indicator(K={self.radius:g},c={self.rate:g})"

    def boundary_distance(self, x: Any) -> np.ndarray:
        """|d_S| to the domain boundary; infinite for kinds without a domain."""
        pts = as_points(x, self.dim)
        if self.domain is None:
            return np.full(pts.shape[0], np.inf)
        return np.abs(self.domain.signed_distance(pts))

    def __call__(self, x: Any) -> np.ndarray:
        pts = as_points(x, self.dim)
        if self.kind is TestFunctionKind.HOLDER:
            if self.form == "cos":
                return np.cos(pts).mean(axis=1)
            if self.form == "abs_power":
                return np.linalg.norm(pts, axis=1) ** self.beta
            return pts[:, 0].copy()
        if self.kind is TestFunctionKind.EXP_INDICATOR:
            r = np.linalg.norm(pts, axis=1)
            return np.where(r <= self.radius, np.exp(self.rate * r), 0.0)
        dist = self.domain.signed_distance(pts)
        if self.kind is TestFunctionKind.INDICATOR:
            return (dist >= 0.0).astype(float)
        return smooth_indicator_profile(dist, self.delta)

    def gradient(self, x: Any) -> np.ndarray:
        """Closed-form gradient of the smooth indicator, ``(n, dim)``."""
        if self.kind is not TestFunctionKind.SMOOTH_INDICATOR:
            raise ConfigurationError(f"closed-form gradient is only available for smooth indicators, not {self.label}")
        pts = as_points(x, self.dim)
        dist = self.domain.signed_distance(pts)
        value = smooth_indicator_profile(dist, self.delta)
        shell = (dist < 0.0) & (dist > -self.delta)
        coef = np.zeros_like(dist)
        u = dist[shell] ** 2 / self.delta**2
        coef[shell] = -2.0 * dist[shell] / (self.delta**2 * (1.0 - u) ** 2) * value[shell]
        return coef[:, None] * self.domain.normal(pts)

    def __repr__(self) -> str:
        return f"TestFunction({self.label})"


def smooth_indicator_profile(dist: np.ndarray, delta: float) -> np.ndarray:
    """1 for d >= 0, e * exp(-1 / (1 - d^2/delta^2)) for -delta < d < 0, 0 below."""
    dist = np.asarray(dist, dtype=float)
    out = (dist >= 0.0).astype(float)
    shell = (dist < 0.0) & (dist > -delta)
    u = dist[shell] ** 2 / delta**2
    out[shell] = np.exp(1.0 - 1.0 / (1.0 - u))
    return out


def smooth_indicator(x: Any, domain: Manifold, delta: float):
    """Value and gradient of f_delta for the domain {d_S >= 0}."""
    f = TestFunction(TestFunctionKind.SMOOTH_INDICATOR, dim=domain.dim, domain=domain, delta=delta)
    return f(x), f.gradient(x)


def make_test_function(table: Dict[str, Any], dim: int = 1) -> TestFunction:
    """Build a test function from a config table such as ``{"kind": "holder", "form": "cos"}``."""
    table = dict(table)
    kind = table.pop("kind", None)
    try:
        kind = TestFunctionKind(kind)
    except ValueError:
        raise ConfigurationError(
            f"unknown test function kind {kind!r}; expected one of {[k.value for k in TestFunctionKind]}"
        ) from None
    domain = table.pop("domain", None)
    if domain is not None:
        domain = make_manifold(domain)
    allowed = {"form", "beta", "delta", "radius", "rate"}
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigurationError(f"unknown test function parameter(s) {unknown} for kind {kind.value!r}")
    return TestFunction(kind, dim=dim, domain=domain, **table)
