# Gaussian product-kernel density estimates of terminal laws, with the plug-in bias bound
# 1/2 sum_k bw_k^2 d_kk p taken from a pilot estimate at twice the bandwidth.

import logging
import math
from typing import Any, Optional, Sequence, Tuple, Union

import numpy as np

from ..euler import TrajectoryBatch
from ..exceptions import ArgumentError, NumericalFault
from ..models import DensityEstimate

logger = logging.getLogger(__name__)

SILVERMAN_SCALE = 0.5
PILOT_FACTOR = 2.0
# kernel matrix entries per chunk
CHUNK_ENTRIES = 1 << 22


def _as_samples(source: Union[TrajectoryBatch, np.ndarray]) -> np.ndarray:
    if isinstance(source, TrajectoryBatch):
        samples = source.terminal
    else:
        samples = np.asarray(source, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ArgumentError(f"density estimate needs a non-empty (M, d) sample, got shape {samples.shape}")
    return samples


def _as_eval_points(points: Any, dim: int) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim <= 1 and dim == 1:
        return pts.reshape(-1, 1)
    if pts.ndim == 1:
        return pts.reshape(1, dim)
    if pts.shape[1] != dim:
        raise ArgumentError(f"evaluation points of shape {pts.shape} for {dim}-dimensional samples")
    return pts


def silverman_bandwidth(samples: np.ndarray, scale: float = SILVERMAN_SCALE) -> np.ndarray:
    """Per-coordinate Silverman rule 0.9 min(std, IQR/1.34) M^(-1/5), times ``scale``."""
    samples = _as_samples(samples)
    std = samples.std(axis=0)
    q75, q25 = np.percentile(samples, [75, 25], axis=0)
    spread = np.minimum(std, (q75 - q25) / 1.34)
    bw = scale * 0.9 * spread * samples.shape[0] ** (-0.2)
    if not np.all(bw > 0.0):
        raise NumericalFault(
            "Silverman bandwidth is zero; the sample has no spread",
            context={"std": std.tolist(), "iqr": (q75 - q25).tolist()},
        )
    return bw


def _check_bandwidth(bandwidth: Any, dim: int) -> np.ndarray:
    bw = np.broadcast_to(np.asarray(bandwidth, dtype=float), (dim,)).copy()
    if not np.all(bw > 0.0) or not np.all(np.isfinite(bw)):
        raise ArgumentError(f"bandwidth must be positive, got {bandwidth!r}")
    return bw


def _kernel(samples: np.ndarray, points: np.ndarray, bw: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Kernel values (P, C) and squared scaled distances."""
    u = (points[:, None, :] - samples[None, :, :]) / bw
    r2 = np.einsum("pcd,pcd->pc", u, u)
    norm = (2.0 * math.pi) ** (0.5 * bw.size) * float(np.prod(bw))
    return np.exp(-0.5 * r2) / norm, r2


def _chunks(m: int, n_points: int):
    size = max(1, CHUNK_ENTRIES // max(n_points, 1))
    for start in range(0, m, size):
        yield slice(start, min(m, start + size))


def _stderr(mean: np.ndarray, second_moment: np.ndarray, m: int) -> np.ndarray:
    var = np.maximum(second_moment - mean**2, 0.0) * (m / (m - 1) if m > 1 else 0.0)
    return np.sqrt(var / m)


def _moments(
    first: np.ndarray, second: Optional[np.ndarray], points: np.ndarray, bw: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean and second moment of per-sample contributions, plus the pilot curvature term.

    With ``second`` given the contribution of sample m is K(y - A_m) - K(y - B_m).
    """
    m, dim = first.shape
    pilot = PILOT_FACTOR * bw
    total = np.zeros(points.shape[0])
    total_sq = np.zeros(points.shape[0])
    curvature = np.zeros(points.shape[0])
    for chunk in _chunks(m, points.shape[0]):
        k, _ = _kernel(first[chunk], points, bw)
        kp, r2p = _kernel(first[chunk], points, pilot)
        curv = kp * (r2p - dim)
        if second is not None:
            k = k - _kernel(second[chunk], points, bw)[0]
            kp2, r2p2 = _kernel(second[chunk], points, pilot)
            curv = curv - kp2 * (r2p2 - dim)
        total += k.sum(axis=1)
        total_sq += np.einsum("pc,pc->p", k, k)
        curvature += curv.sum(axis=1)
    # sum_k bw_k^2 d_kk of the pilot estimate is mean(K_pilot (r2 - d)) / PILOT_FACTOR^2
    bias = 0.5 * np.abs(curvature / m) / PILOT_FACTOR**2
    return total / m, total_sq / m, bias


def kde_density(
    source: Union[TrajectoryBatch, np.ndarray],
    eval_grid: Any,
    bandwidth: Optional[Union[float, Sequence[float]]] = None,
    scale: float = SILVERMAN_SCALE,
) -> DensityEstimate:
    """Gaussian-kernel estimate of the terminal law at ``eval_grid``.

    Without an explicit bandwidth the scaled Silverman rule is used. The recorded
    ``bias_bound`` is the plug-in estimate 1/2 sum_k bw_k^2 |d_kk p| per point.
    """
    samples = _as_samples(source)
    m, dim = samples.shape
    points = _as_eval_points(eval_grid, dim)
    bw = silverman_bandwidth(samples, scale) if bandwidth is None else _check_bandwidth(bandwidth, dim)
    values, second_moment, bias = _moments(samples, None, points, bw)
    if isinstance(source, TrajectoryBatch):
        t, x0 = source.grid.horizon, np.asarray(source.x0, dtype=float).reshape(-1).tolist()
    else:
        t, x0 = float("nan"), []
    logger.debug("kde over %d samples at %d point(s), bandwidth %s", m, points.shape[0], bw.tolist())
    return DensityEstimate(
        method="kde",
        s=0.0,
        t=t,
        x=x0,
        points=points.tolist(),
        values=values.tolist(),
        bandwidth=bw.tolist(),
        bias_bound=bias.tolist(),
        stderr=_stderr(values, second_moment, m).tolist(),
    )


def kde_difference(
    first: np.ndarray, second: np.ndarray, points: Any, bandwidth: Union[float, Sequence[float]]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """KDE of ``first`` minus KDE of ``second`` on coupled samples (same path index = same noise).

    Returns the difference, its standard error from the per-path contributions and the
    plug-in bias bound of the difference.
    """
    a = _as_samples(first)
    b = _as_samples(second)
    if a.shape != b.shape:
        raise ArgumentError(f"coupled samples differ in shape: {a.shape} vs {b.shape}")
    m, dim = a.shape
    pts = _as_eval_points(points, dim)
    bw = _check_bandwidth(bandwidth, dim)
    mean, second_moment, bias = _moments(a, b, pts, bw)
    return mean, _stderr(mean, second_moment, m), bias
