# Space-time convolution of Hölder coefficients with the bump kernel.

import logging
from typing import Callable, Optional

import numpy as np

from ..coefficients import CoefficientField, Regime
from ..exceptions import ConfigurationError
from ._field import MollifiedField, MollifyMethod
from ._kernel import MollifierKernel

logger = logging.getLogger(__name__)

DEFAULT_NODES = 24
_CHUNK = 1 << 20


def _check_radius(eps: float) -> float:
    eps = float(eps)
    if not 0.0 < eps <= 1.0:
        raise ConfigurationError(f"mollification radius must lie in (0, 1], got {eps}")
    return eps


class SpatialConvolution:
    """x -> sum_k w_k f(t, x - eps z_k), the discrete f(t, .) * rho_eps."""

    def __init__(self, fn: Callable[[float, np.ndarray], np.ndarray], kernel: MollifierKernel, eps: float) -> None:
        self.fn = fn
        self.eps = eps
        self.points = kernel.points
        self.weights = kernel.weights

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        k = self.weights.size
        n, d = x.shape
        chunk = max(1, _CHUNK // k)
        parts = []
        for start in range(0, n, chunk):
            block = x[start : start + chunk]
            m = block.shape[0]
            shifted = (block[None, :, :] - self.eps * self.points[:, None, :]).reshape(-1, d)
            vals = self.fn(t, shifted)
            vals = vals.reshape((k, m) + vals.shape[1:])
            parts.append(np.tensordot(self.weights, vals, axes=1))
        return np.concatenate(parts, axis=0)


def reflect_time(tau: np.ndarray, horizon: Optional[float]) -> np.ndarray:
    """Even reflection at 0 and, when a horizon is given, at T."""
    tau = np.abs(tau)
    if horizon is not None:
        tau = np.where(tau > horizon, 2.0 * horizon - tau, tau)
    return tau


class TimeConvolution:
    """t -> sum_j v_j f(t - eps^2 s_j, x) with the reflected time argument."""

    def __init__(self, fn, kernel: MollifierKernel, eps: float, horizon: Optional[float]) -> None:
        self.fn = fn
        self.offsets = (eps * eps) * kernel.points[:, 0]
        self.weights = kernel.weights
        self.horizon = horizon

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        taus = reflect_time(t - self.offsets, self.horizon)
        total = None
        for w, tau in zip(self.weights, taus):
            term = w * self.fn(float(tau), x)
            total = term if total is None else total + term
        return total


def mollify_holder(
    field: CoefficientField,
    eps: float,
    nodes: int = DEFAULT_NODES,
    horizon: Optional[float] = None,
) -> MollifiedField:
    """Convolve b and sigma with rho_eps in space and, for time-dependent fields, zeta_{eps^2} in time."""
    if field.regime is not Regime.HOLDER:
        raise ConfigurationError(
            f"model {field.name!r} is {field.regime.value}; Hölder convolution needs a Hölder field"
        )
    eps = _check_radius(eps)
    kernel = MollifierKernel(field.dim, nodes)
    drift = SpatialConvolution(field.drift, kernel, eps)
    sigma = SpatialConvolution(field.sigma, kernel, eps)
    if field.time_dependent:
        time_kernel = MollifierKernel(1, nodes)
        drift = TimeConvolution(drift, time_kernel, eps, horizon)
        sigma = TimeConvolution(sigma, time_kernel, eps, horizon)
    logger.debug("mollified %s with eps=%g (%d kernel nodes)", field.name, eps, kernel.weights.size)
    return MollifiedField(field, eps, MollifyMethod.HOLDER_CONVOLUTION, drift, sigma, nodes, horizon)
