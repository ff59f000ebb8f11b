# Frozen-coefficient Gaussian proxy: covariance integrals and closed-form densities.

import math
from dataclasses import dataclass
from typing import Any, Tuple

import numpy as np

from ..coefficients import CoefficientField, as_points
from ..exceptions import ArgumentError, NumericalFault
from ._quadrature import gauss_legendre

DEFAULT_COVARIANCE_NODES = 16


def diffusion_at(field: CoefficientField, times: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """a(u_k, z) for z of shape (L, U, ..., d) with the time index on axis 1."""
    d = field.dim
    if not field.time_dependent:
        flat = pts.reshape(-1, d)
        return field.diffusion(0.0, flat).reshape(pts.shape + (d,))
    out = np.empty(pts.shape + (d,))
    for k, u in enumerate(np.atleast_1d(times)):
        block = pts[:, k]
        out[:, k] = field.diffusion(float(u), block.reshape(-1, d)).reshape(block.shape + (d,))
    return out


def drift_at(field: CoefficientField, times: np.ndarray, pts: np.ndarray) -> np.ndarray:
    d = field.dim
    if not field.time_dependent:
        return field.drift(0.0, pts.reshape(-1, d)).reshape(pts.shape)
    out = np.empty(pts.shape)
    for k, u in enumerate(np.atleast_1d(times)):
        block = pts[:, k]
        out[:, k] = field.drift(float(u), block.reshape(-1, d)).reshape(block.shape)
    return out


def covariance_between(
    field: CoefficientField,
    lower: np.ndarray,
    upper: np.ndarray,
    pts: np.ndarray,
    nodes: int = DEFAULT_COVARIANCE_NODES,
) -> np.ndarray:
    """int_{lower_k}^{upper_k} a(v, z) dv for z of shape (L, U, ..., d), interval k on axis 1."""
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (pts.shape[1],))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (pts.shape[1],))
    length = upper - lower
    expand = (1, -1) + (1,) * (pts.ndim - 3) + (1, 1)
    if not field.time_dependent:
        return length.reshape(expand) * diffusion_at(field, lower, pts)
    g, w = gauss_legendre(nodes)
    total = np.zeros(pts.shape + (field.dim,))
    for gj, wj in zip(g, w):
        v = lower + 0.5 * (gj + 1.0) * length
        total += (0.5 * wj * length).reshape(expand) * diffusion_at(field, v, pts)
    return total


def chain_covariance(
    field: CoefficientField,
    lower: np.ndarray,
    upper: np.ndarray,
    pts: np.ndarray,
    h: float,
) -> np.ndarray:
    """h sum_l a(lower_k + l h, z) over the Euler steps in [lower_k, upper_k); shapes as covariance_between."""
    lower = np.broadcast_to(np.asarray(lower, dtype=float), (pts.shape[1],))
    upper = np.broadcast_to(np.asarray(upper, dtype=float), (pts.shape[1],))
    counts = np.rint((upper - lower) / h).astype(int)
    expand = (1, -1) + (1,) * (pts.ndim - 3) + (1, 1)
    if not field.time_dependent:
        return (h * counts).reshape(expand) * diffusion_at(field, lower, pts)
    total = np.zeros(pts.shape + (field.dim,))
    for step in range(int(counts.max(initial=0))):
        active = (step < counts).astype(float)
        total += (h * active).reshape(expand) * diffusion_at(field, lower + step * h, pts)
    return total


def covariance_integral(
    field: CoefficientField, s: float, t: float, y: Any, nodes: int = DEFAULT_COVARIANCE_NODES
) -> np.ndarray:
    """Sigma(s, t, y) = int_s^t a(v, y) dv, shape (n, d, d)."""
    pts = as_points(y, field.dim)
    return covariance_between(field, s, t, pts[:, None, :], nodes)[:, 0]


def gaussian_terms(diff: np.ndarray, cov: np.ndarray, where: str = "proxy") -> Tuple[np.ndarray, np.ndarray]:
    """Density phi_cov(diff) and the precision matrix, with an SPD check on ``cov``."""
    d = diff.shape[-1]
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise NumericalFault(f"{where} covariance is not positive definite", context={"where": where}) from exc
    prec = np.linalg.inv(cov)
    logdet = 2.0 * np.sum(np.log(np.diagonal(chol, axis1=-2, axis2=-1)), axis=-1)
    quad = np.einsum("...i,...ij,...j->...", diff, prec, diff)
    dens = np.exp(-0.5 * quad - 0.5 * logdet - 0.5 * d * math.log(2.0 * math.pi))
    return dens, prec


@dataclass
class GaussianProxy:
    """Driftless Gaussian transition from (s, x) to (t, .) with coefficients frozen at ``frozen_point``."""

    s: float
    t: float
    frozen_point: np.ndarray
    covariance: np.ndarray

    @classmethod
    def frozen_at(
        cls, field: CoefficientField, s: float, t: float, y: Any, nodes: int = DEFAULT_COVARIANCE_NODES
    ) -> "GaussianProxy":
        if not s < t:
            raise ArgumentError(f"proxy needs s < t, got s={s}, t={t}")
        point = as_points(y, field.dim)[0]
        cov = covariance_integral(field, s, t, point, nodes)[0]
        return cls(s=float(s), t=float(t), frozen_point=point, covariance=cov)

    def density(self, x: Any) -> np.ndarray:
        pts = as_points(x, self.frozen_point.size)
        dens, _ = gaussian_terms(self.frozen_point - pts, self.covariance)
        return dens

    def gradient_z(self, z: Any) -> np.ndarray:
        """Gradient of the density in the starting point z: Sigma^{-1}(y - z) p."""
        pts = as_points(z, self.frozen_point.size)
        diff = self.frozen_point - pts
        dens, prec = gaussian_terms(diff, self.covariance)
        return (diff @ prec.T) * dens[:, None]


def proxy_density(s: float, t: float, x: Any, y: Any, field: CoefficientField, nodes: int = DEFAULT_COVARIANCE_NODES):
    """Gaussian density with covariance Sigma(s, t, y) evaluated at y - x."""
    value = GaussianProxy.frozen_at(field, s, t, y, nodes).density(x)
    return float(value[0]) if value.size == 1 else value


def ou_density(s: float, t: float, x: Any, y: Any, theta: float, sigma: float = 1.0):
    """Transition density of dX = -theta X dt + sigma dW (coordinate-wise in several dimensions)."""
    tau = t - s
    if tau <= 0.0:
        raise ArgumentError(f"ou_density needs s < t, got s={s}, t={t}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if theta == 0.0:
        var = sigma**2 * tau
    else:
        var = sigma**2 * (1.0 - math.exp(-2.0 * theta * tau)) / (2.0 * theta)
    mean = x * math.exp(-theta * tau)
    dens = np.exp(-((y - mean) ** 2) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
    if dens.ndim == 0:
        return float(dens)
    return np.prod(dens, axis=-1) if dens.ndim > 1 else dens
