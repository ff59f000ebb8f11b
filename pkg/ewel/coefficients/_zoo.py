# Model zoo: closed-form coefficient fields addressable by name from experiment configs.
# Coefficient callables are small module-level classes so fields pickle into worker processes.

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from ..exceptions import ConfigurationError
from ._field import CoefficientField, Regime
from ._manifolds import (
    DiscontinuitySet,
    HyperplaneManifold,
    PointManifold,
    SphereManifold,
)
from ._weierstrass import weierstrass, weierstrass_sup, weierstrass_table


# ---------------------------------------------------------------------------
# Drift evaluators
# ---------------------------------------------------------------------------


class ConstantDrift:
    __slots__ = ("value",)

    def __init__(self, value: np.ndarray) -> None:
        self.value = np.asarray(value, dtype=float)

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.value, x.shape).copy()


class LinearDrift:
    """b(x) = -theta x."""

    __slots__ = ("theta",)

    def __init__(self, theta: float) -> None:
        self.theta = float(theta)

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return -self.theta * x


class SaturatedLinearDrift:
    """b(x) = -theta cap tanh(x / cap): linear near 0, bounded by theta cap."""

    __slots__ = ("theta", "cap")

    def __init__(self, theta: float, cap: float) -> None:
        self.theta = float(theta)
        self.cap = float(cap)

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return -self.theta * self.cap * np.tanh(x / self.cap)


class TanhDrift:
    __slots__ = ("amplitude",)

    def __init__(self, amplitude: float) -> None:
        self.amplitude = float(amplitude)

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.amplitude * np.tanh(x)


class JumpDrift:
    """Constant vector on each side of the nearest manifold; d_S = 0 takes the positive side."""

    __slots__ = ("positive", "negative", "discontinuities")

    def __init__(self, positive: np.ndarray, negative: np.ndarray, discontinuities: DiscontinuitySet) -> None:
        self.positive = np.asarray(positive, dtype=float)
        self.negative = np.asarray(negative, dtype=float)
        self.discontinuities = discontinuities

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        _, ds = self.discontinuities.nearest(x)
        return np.where((ds >= 0.0)[:, None], self.positive, self.negative)


class ClippedAffineDrift:
    """b(x) = a - k clip(x, -cap, cap)."""

    __slots__ = ("a", "k", "cap")

    def __init__(self, a: float, k: float, cap: float) -> None:
        self.a = float(a)
        self.k = float(k)
        self.cap = float(cap)

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.a - self.k * np.clip(x, -self.cap, self.cap)


# ---------------------------------------------------------------------------
# Diffusion evaluators (diagonal returns, expanded by CoefficientField.sigma)
# ---------------------------------------------------------------------------


class ConstantSigma:
    __slots__ = ("scale",)

    def __init__(self, scale: float) -> None:
        self.scale = float(scale)

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.full(x.shape, self.scale)


class WeierstrassSigma:
    """sigma_i(x) = 1 + A clip(W(x_i) / W(0), -1, 1) on the diagonal."""

    __slots__ = ("gamma", "base", "n_terms", "amplitude", "scale", "table")

    def __init__(self, gamma: float, base: int, n_terms: int, amplitude: float, tabulate: bool = True) -> None:
        self.gamma = float(gamma)
        self.base = int(base)
        self.n_terms = int(n_terms)
        self.amplitude = float(amplitude)
        self.scale = weierstrass_sup(self.gamma, self.base, self.n_terms)
        self.table = weierstrass_table(self.gamma, self.base, self.n_terms) if tabulate else None

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        if self.table is not None:
            w = self.table(x)
        else:
            w = weierstrass(x, self.gamma, self.base, self.n_terms)
        return 1.0 + self.amplitude * np.clip(w / self.scale, -1.0, 1.0)


class CirSigma:
    """sigma(x) = eta + min(sigma0 sqrt|x|, cap)."""

    __slots__ = ("eta", "sigma0", "cap")

    def __init__(self, eta: float, sigma0: float, cap: float) -> None:
        self.eta = float(eta)
        self.sigma0 = float(sigma0)
        self.cap = float(cap)

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return self.eta + np.minimum(self.sigma0 * np.sqrt(np.abs(x)), self.cap)


class TimeSineSigma:
    """sigma(t) = sigma0 + A sin(2 pi t / period), identical on every coordinate."""

    __slots__ = ("sigma0", "amplitude", "period")

    def __init__(self, sigma0: float, amplitude: float, period: float) -> None:
        self.sigma0 = float(sigma0)
        self.amplitude = float(amplitude)
        self.period = float(period)

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.full(x.shape, self.sigma0 + self.amplitude * math.sin(2.0 * math.pi * t / self.period))


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def _ellipticity(sig_min: float, sig_max: float) -> float:
    if sig_min <= 0.0:
        return max(1.0, sig_max**2)
    return max(1.0, sig_max**2, 1.0 / sig_min**2)


def _vector(value: Any, dim: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.size == 1:
        return np.full(dim, float(arr[0]))
    if arr.size != dim:
        raise ConfigurationError(f"parameter {name!r} has length {arr.size}, expected {dim}")
    return arr


def _constant(drift: Any, sigma: float, dim: int) -> CoefficientField:
    vec = _vector(drift, dim, "drift")
    return CoefficientField(
        "constant",
        ConstantDrift(vec),
        ConstantSigma(sigma),
        dim,
        k1=float(np.linalg.norm(vec)),
        k2=abs(sigma),
        lam=_ellipticity(abs(sigma), abs(sigma)),
        state_free_sigma=True,
    )


def _linear_bounded(theta: float, cap: float, sigma: float, dim: int) -> CoefficientField:
    return CoefficientField(
        "linear_bounded",
        SaturatedLinearDrift(theta, cap),
        ConstantSigma(sigma),
        dim,
        k1=abs(theta) * cap * math.sqrt(dim),
        k2=abs(sigma),
        lam=_ellipticity(abs(sigma), abs(sigma)),
        state_free_sigma=True,
    )


def _ou(theta: float, sigma: float, dim: int, box: float) -> CoefficientField:
    # the drift is unbounded; k1 holds on the validation box [-box, box]^d
    return CoefficientField(
        "ou",
        LinearDrift(theta),
        ConstantSigma(sigma),
        dim,
        k1=abs(theta) * box * math.sqrt(dim),
        k2=abs(sigma),
        lam=_ellipticity(abs(sigma), abs(sigma)),
        state_free_sigma=True,
    )


def _tanh_drift(amplitude: float, sigma: float, dim: int) -> CoefficientField:
    return CoefficientField(
        "tanh_drift",
        TanhDrift(amplitude),
        ConstantSigma(sigma),
        dim,
        k1=abs(amplitude) * math.sqrt(dim),
        k2=abs(sigma),
        lam=_ellipticity(abs(sigma), abs(sigma)),
        state_free_sigma=True,
    )


def _weierstrass_sigma(
    gamma: float, base: int, n_terms: int, amplitude: float, drift_amplitude: float, dim: int, tabulate: bool
) -> CoefficientField:
    if not 0.0 <= amplitude < 1.0:
        raise ConfigurationError(f"amplitude must lie in [0, 1) to keep sigma elliptic, got {amplitude}")
    return CoefficientField(
        "weierstrass_sigma",
        TanhDrift(-drift_amplitude),
        WeierstrassSigma(gamma, base, n_terms, amplitude, tabulate=tabulate),
        dim,
        gamma=gamma,
        k1=abs(drift_amplitude) * math.sqrt(dim),
        k2=1.0 + amplitude,
        lam=_ellipticity(1.0 - amplitude, 1.0 + amplitude),
    )


def _sign_drift(amplitude: float, sigma: float, point: float) -> CoefficientField:
    disc = DiscontinuitySet([PointManifold(point)])
    return CoefficientField(
        "sign_drift",
        JumpDrift([amplitude], [-amplitude], disc),
        ConstantSigma(sigma),
        1,
        regime=Regime.PIECEWISE_SMOOTH,
        k1=abs(amplitude),
        k2=abs(sigma),
        lam=_ellipticity(abs(sigma), abs(sigma)),
        discontinuities=disc,
        state_free_sigma=True,
    )


def _hyperplane_drift(amplitude: float, sigma: float, normal: List[float], offset: float) -> CoefficientField:
    plane = HyperplaneManifold(normal, offset)
    disc = DiscontinuitySet([plane])
    return CoefficientField(
        "hyperplane_drift",
        JumpDrift(amplitude * plane.normal_vector, -amplitude * plane.normal_vector, disc),
        ConstantSigma(sigma),
        plane.dim,
        regime=Regime.PIECEWISE_SMOOTH,
        k1=abs(amplitude),
        k2=abs(sigma),
        lam=_ellipticity(abs(sigma), abs(sigma)),
        discontinuities=disc,
        state_free_sigma=True,
    )


def _sphere_drift(
    inside: List[float], outside: List[float], center: List[float], radius: float, sigma: float
) -> CoefficientField:
    sphere = SphereManifold(center, radius)
    disc = DiscontinuitySet([sphere])
    v_in = _vector(inside, sphere.dim, "inside")
    v_out = _vector(outside, sphere.dim, "outside")
    return CoefficientField(
        "sphere_drift",
        JumpDrift(v_in, v_out, disc),
        ConstantSigma(sigma),
        sphere.dim,
        regime=Regime.PIECEWISE_SMOOTH,
        k1=float(max(np.linalg.norm(v_in), np.linalg.norm(v_out))),
        k2=abs(sigma),
        lam=_ellipticity(abs(sigma), abs(sigma)),
        discontinuities=disc,
        state_free_sigma=True,
    )


def _cir_like(a: float, k: float, drift_cap: float, eta: float, sigma0: float, cap: float) -> CoefficientField:
    if eta <= 0.0:
        raise ConfigurationError(f"eta must be positive for uniform ellipticity, got {eta}")
    return CoefficientField(
        "cir_like",
        ClippedAffineDrift(a, k, drift_cap),
        CirSigma(eta, sigma0, cap),
        1,
        gamma=0.5,
        k1=abs(a) + abs(k) * drift_cap,
        k2=eta + cap,
        lam=_ellipticity(eta, eta + cap),
    )


def _time_sine(sigma0: float, amplitude: float, period: float, drift: Any, dim: int) -> CoefficientField:
    if abs(amplitude) >= sigma0:
        raise ConfigurationError("time_sine needs |amplitude| < sigma0")
    vec = _vector(drift, dim, "drift")
    return CoefficientField(
        "time_sine",
        ConstantDrift(vec),
        TimeSineSigma(sigma0, amplitude, period),
        dim,
        k1=float(np.linalg.norm(vec)),
        k2=sigma0 + abs(amplitude),
        lam=_ellipticity(sigma0 - abs(amplitude), sigma0 + abs(amplitude)),
        time_dependent=True,
        state_free_sigma=True,
    )


@dataclass(frozen=True)
class ModelEntry:
    name: str
    description: str
    builder: Callable[..., CoefficientField]
    defaults: Dict[str, Any] = field(default_factory=dict)


_MODELS: Dict[str, ModelEntry] = {
    entry.name: entry
    for entry in (
        ModelEntry("constant", "b constant, sigma constant (Euler is exact)", _constant,
                   {"drift": 0.0, "sigma": 1.0, "dim": 1}),
        ModelEntry("linear_bounded", "b = -theta cap tanh(x/cap), sigma constant", _linear_bounded,
                   {"theta": 1.0, "cap": 2.0, "sigma": 1.0, "dim": 1}),
        ModelEntry("ou", "Ornstein-Uhlenbeck b = -theta x, sigma constant", _ou,
                   {"theta": 1.0, "sigma": 1.0, "dim": 1, "box": 3.0}),
        ModelEntry("tanh_drift", "b = A tanh(x), sigma constant", _tanh_drift,
                   {"amplitude": 0.5, "sigma": 1.0, "dim": 1}),
        ModelEntry("weierstrass_sigma", "sigma = 1 + A W_gamma(x)/W(0), b = -B tanh(x)", _weierstrass_sigma,
                   {"gamma": 0.5, "base": 2, "n_terms": 16, "amplitude": 0.5,
                    "drift_amplitude": 0.5, "dim": 1, "tabulate": True}),
        ModelEntry("sign_drift", "b = A sign(x - p) in 1D, sigma constant", _sign_drift,
                   {"amplitude": 0.5, "sigma": 1.0, "point": 0.0}),
        ModelEntry("hyperplane_drift", "b = +-A n across a hyperplane, sigma constant", _hyperplane_drift,
                   {"amplitude": 0.5, "sigma": 1.0, "normal": [1.0, 0.0], "offset": 0.0}),
        ModelEntry("sphere_drift", "b = v_in inside a sphere, v_out outside", _sphere_drift,
                   {"inside": [0.5, 0.0], "outside": [-0.5, 0.0], "center": [0.0, 0.0],
                    "radius": 1.0, "sigma": 1.0}),
        ModelEntry("cir_like", "b = a - k clip(x), sigma = eta + min(sigma0 sqrt|x|, cap)", _cir_like,
                   {"a": 0.5, "k": 1.0, "drift_cap": 2.0, "eta": 0.1, "sigma0": 1.0, "cap": 2.0}),
        ModelEntry("time_sine", "sigma(t) = sigma0 + A sin(2 pi t / P), b constant", _time_sine,
                   {"sigma0": 1.0, "amplitude": 0.5, "period": 1.0, "drift": 0.0, "dim": 1}),
    )
}


def list_models() -> List[ModelEntry]:
    return [_MODELS[name] for name in sorted(_MODELS)]


def make_model(name: str, params: Optional[Dict[str, Any]] = None) -> CoefficientField:
    """Build a zoo model; unknown names or parameters are configuration errors."""
    entry = _MODELS.get(name)
    if entry is None:
        raise ConfigurationError(
            f"unknown model {name!r}; available: {', '.join(sorted(_MODELS))}",
            context={"field": "model.name"},
        )
    given = dict(params or {})
    unknown = sorted(set(given) - set(entry.defaults))
    if unknown:
        raise ConfigurationError(
            f"model {name!r} has no parameter(s) {', '.join(unknown)}",
            context={"field": "model.params", "unknown": unknown},
        )
    merged = {**entry.defaults, **given}
    field_ = entry.builder(**merged)
    field_.params.update(merged)
    return field_
