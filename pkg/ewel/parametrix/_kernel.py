# Parametrix kernel H = (L - L~^y) p~ and its Euler-chain analogue.

from typing import Any

import numpy as np

from ..coefficients import CoefficientField, as_points
from ..exceptions import ArgumentError, NumericalFault
from ._proxy import (
    DEFAULT_COVARIANCE_NODES,
    chain_covariance,
    covariance_between,
    diffusion_at,
    drift_at,
    gaussian_terms,
)
from ._quadrature import hermite_rule

DEFAULT_HERMITE_NODES = 20


def kernel_values(
    field: CoefficientField,
    u: np.ndarray,
    t: float,
    z: np.ndarray,
    y: np.ndarray,
    nodes: int = DEFAULT_COVARIANCE_NODES,
) -> np.ndarray:
    """H(u_k, t, z, y_l) on z of shape (L, U, Z, d) for targets y of shape (L, d).

    <b(u, z), grad_z p~> + 1/2 Tr((a(u, z) - a(u, y)) D_z^2 p~), with p~ the Gaussian of
    covariance int_u^t a(v, y) dv; grad_z p~ = P(y - z) p~ and
    D_z^2 p~ = (P(y - z)(y - z)^T P - P) p~ for the precision P.
    """
    L, U = z.shape[0], z.shape[1]
    y_grid = np.broadcast_to(y[:, None, :], (L, U, y.shape[1]))
    cov = covariance_between(field, u, np.full(U, t), y_grid, nodes)[:, :, None]
    diff = y[:, None, None, :] - z
    dens, prec = gaussian_terms(diff, cov, where="kernel proxy")
    g = np.einsum("...ij,...j->...i", prec, diff)
    b = drift_at(field, u, z)
    da = diffusion_at(field, u, z) - diffusion_at(field, u, y_grid)[:, :, None]
    first = np.sum(b * g, axis=-1)
    second = 0.5 * (np.einsum("...i,...ij,...j->...", g, da, g) - np.einsum("...ij,...ji->...", da, prec))
    return (first + second) * dens


def chain_kernel_values(
    field: CoefficientField,
    u: np.ndarray,
    t: float,
    z: np.ndarray,
    y: np.ndarray,
    h: float,
) -> np.ndarray:
    """H^h(u_k, t, z, y_l) on z of shape (L, U, Z, d), exact in the Gaussian increment.

    With C = h sum over the grid times in (u, t) of a(t_l, y), the Euler step gives
    E p~^h(z + b h + sigma(z) sqrt(h) G) = phi_{C + h a(u, z)}(y - z - b h) and the frozen
    step phi_{C + h a(u, y)}(y - z). C = 0 on the last step, where p~^h is a Dirac mass.
    """
    L, U = z.shape[0], z.shape[1]
    y_grid = np.broadcast_to(y[:, None, :], (L, U, y.shape[1]))
    frozen_cov = chain_covariance(field, u, np.full(U, t), y_grid, h)[:, :, None]
    moved_cov = frozen_cov + h * (diffusion_at(field, u, z) - diffusion_at(field, u, y_grid)[:, :, None])
    diff = y[:, None, None, :] - z
    moved, _ = gaussian_terms(diff - h * drift_at(field, u, z), moved_cov, where="chain kernel")
    frozen, _ = gaussian_terms(diff, frozen_cov, where="chain kernel")
    return (moved - frozen) / h


def kernel_H(u: float, t: float, z: Any, y: Any, field: CoefficientField, nodes: int = DEFAULT_COVARIANCE_NODES):
    """Parametrix kernel at (u, t, z, y); ``z`` and ``y`` are single points."""
    if not u < t:
        raise ArgumentError(f"kernel needs u < t, got u={u}, t={t}")
    zp = as_points(z, field.dim)[:1]
    yp = as_points(y, field.dim)[:1]
    value = kernel_values(field, np.array([float(u)]), float(t), zp[None, None, :, :], yp, nodes)
    return float(value.reshape(-1)[0])


def euler_chain_kernel(
    t_i: float,
    t_j: float,
    z: Any,
    y: Any,
    field: CoefficientField,
    h: float,
    nodes: int = DEFAULT_HERMITE_NODES,
):
    """One-step generator difference of the Euler chain applied to the chain proxy.

    H^h = (E p~^h(z + b h + sigma(z) sqrt(h) G) - E p~^h(z + sigma(y) sqrt(h) G)) / h with
    p~^h the Gaussian of covariance h sum_{l=i+1}^{j-1} a(t_l, y) and G standard normal.
    """
    steps = (t_j - t_i) / h
    n_steps = int(round(steps))
    if abs(steps - n_steps) > 1e-9 * max(1.0, steps) or n_steps < 2:
        raise ArgumentError(
            f"chain kernel needs t_j >= t_i + 2h on the grid, got t_i={t_i}, t_j={t_j}, h={h}"
        )
    d = field.dim
    zp = as_points(z, d)
    yp = as_points(y, d)[0]
    times = t_i + h * np.arange(1, n_steps)
    a_y = np.stack([field.diffusion(float(tl), yp[None, :])[0] for tl in times])
    cov = h * a_y.sum(axis=0)

    g, w = hermite_rule(nodes, d)
    b = field.drift(t_i, zp)
    sig_z = field.sigma(t_i, zp)
    sig_y = field.sigma(t_i, yp[None, :])[0]
    root = np.sqrt(h)
    moved = zp[:, None, :] + b[:, None, :] * h + root * np.einsum("nij,kj->nki", sig_z, g)
    frozen = zp[:, None, :] + root * (g @ sig_y.T)[None, :, :]
    dens_moved, _ = gaussian_terms(yp - moved, cov, where="chain proxy")
    dens_frozen, _ = gaussian_terms(yp - frozen, cov, where="chain proxy")
    value = ((dens_moved - dens_frozen) @ w) / h
    if not np.all(np.isfinite(value)):
        raise NumericalFault("non-finite chain kernel value", context={"t_i": t_i, "t_j": t_j})
    return float(value[0]) if value.size == 1 else value
