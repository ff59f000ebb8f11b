# Sampled checks of boundedness, uniform ellipticity and Hölder regularity of a field.

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from ..models import Struct
from ._field import CoefficientField, Regime

logger = logging.getLogger(__name__)

_REL_TOL = 1e-9
HOLDER_EXPONENT_SLACK = 0.15
_MAX_ANCHORS = 2048


@dataclass
class SampleGrid:
    """Where assumptions are sampled: [0, horizon] x [-radius, radius]^d."""

    horizon: float = 1.0
    radius: float = 3.0
    resolution: int = 41
    time_resolution: int = 5
    n_pairs: int = 10_000
    min_pair_distance: float = 1e-6
    max_pair_distance: float = 1.0
    distance_bins: int = 12
    seed: int = 0

    def axis(self) -> np.ndarray:
        nodes = np.linspace(-self.radius, self.radius, self.resolution)
        if self.resolution % 2 == 1:
            nodes[self.resolution // 2] = 0.0
        return nodes

    def lattice(self, dim: int) -> np.ndarray:
        axes = np.meshgrid(*([self.axis()] * dim), indexing="ij")
        return np.stack([a.reshape(-1) for a in axes], axis=1)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.horizon, self.time_resolution)


class Violation(Struct):
    kind: str
    t: float
    x: List[float]
    value: float
    bound: float


class ValidationReport(Struct):
    model: str
    regime: str
    dim: int
    k1_declared: float
    k1_measured: float
    k2_declared: float
    k2_measured: float
    lambda_declared: float
    ellipticity_min: float
    ellipticity_max: float
    holder_quotient: float
    holder_exponent: Optional[float]
    passed: bool
    violations: List[Violation] = []


def spectral_norm(mats: np.ndarray) -> np.ndarray:
    return np.linalg.norm(mats, ord=2, axis=(1, 2))


def sample_pairs(grid: SampleGrid, dim: int, rng: np.random.Generator) -> Tuple[np.ndarray, ...]:
    """Pairs (s, x), (t, y) with |x - y| log-uniform in [min, max] distance.

    Anchors combine lattice nodes (so the origin is always sampled) and uniform points.
    The lattice pairs share one time so they also feed the spatial exponent estimate.
    """
    lo, hi = np.log(grid.min_pair_distance), np.log(grid.max_pair_distance)

    anchors = grid.lattice(dim)
    if anchors.shape[0] > _MAX_ANCHORS:
        keep = rng.choice(anchors.shape[0], size=_MAX_ANCHORS - 1, replace=False)
        anchors = np.vstack([np.zeros((1, dim)), anchors[keep]])
    ladder = np.exp(np.linspace(lo, hi, 2 * grid.distance_bins))
    lat_x = np.repeat(anchors, 2 * ladder.size, axis=0)
    signs = np.tile(np.concatenate([ladder, -ladder]), anchors.shape[0])
    direction = np.zeros_like(lat_x)
    direction[:, 0] = 1.0
    lat_y = lat_x + signs[:, None] * direction
    lat_t = np.full(lat_x.shape[0], 0.5 * grid.horizon)

    n = grid.n_pairs
    rnd_x = rng.uniform(-grid.radius, grid.radius, size=(n, dim))
    u = rng.normal(size=(n, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    dist = np.exp(rng.uniform(lo, hi, size=n))
    rnd_y = rnd_x + dist[:, None] * u
    s = rng.uniform(0.0, grid.horizon, size=n)
    dt = np.exp(rng.uniform(lo, hi, size=n)) * grid.horizon
    t = np.clip(s + np.where(rng.uniform(size=n) < 0.5, -dt, dt), 0.0, grid.horizon)
    return lat_x, lat_y, lat_t, rnd_x, rnd_y, s, t


def eval_grouped(fn, times: np.ndarray, pts: np.ndarray, time_dependent: bool = True) -> np.ndarray:
    """Evaluate ``fn(t, x)`` for per-point times by grouping equal times."""
    if not time_dependent:
        return fn(float(times[0]), pts)
    out = None
    for t in np.unique(times):
        mask = times == t
        vals = fn(float(t), pts[mask])
        if out is None:
            out = np.empty((pts.shape[0],) + vals.shape[1:])
        out[mask] = vals
    return out


def measure_holder_exponent(distances: np.ndarray, increments: np.ndarray, bins: int) -> Optional[float]:
    """Slope of log(max increment) against log(distance) over log-spaced distance bins.

    Returns ``None`` when fewer than three bins carry a non-negligible increment
    (a constant map has no measurable exponent).
    """
    scale = max(float(np.max(increments)), 1.0) if increments.size else 1.0
    edges = np.linspace(np.log(distances.min()), np.log(distances.max()) + 1e-12, bins + 1)
    which = np.clip(np.digitize(np.log(distances), edges) - 1, 0, bins - 1)
    xs, ys = [], []
    for b in range(bins):
        mask = which == b
        if not np.any(mask):
            continue
        k = np.argmax(np.where(mask, increments, -np.inf))
        if increments[k] > 1e-13 * scale:
            xs.append(np.log(distances[k]))
            ys.append(np.log(increments[k]))
    if len(xs) < 3:
        return None
    slope, _ = np.polyfit(np.asarray(xs), np.asarray(ys), 1)
    return float(slope)


def validate_assumptions(field: CoefficientField, grid: Optional[SampleGrid] = None) -> ValidationReport:
    """Measure boundedness, ellipticity and the Hölder regularity of ``field`` on ``grid``.

    Violations are collected in the report (worst sample per kind); nothing is raised.
    """
    grid = grid or SampleGrid()
    rng = np.random.default_rng(grid.seed)
    dim = field.dim
    lattice = grid.lattice(dim)
    violations: List[Violation] = []

    k1_measured = k2_measured = 0.0
    eig_min, eig_max = np.inf, -np.inf
    worst = {"k1": (0.0, None), "k2": (0.0, None), "ell_lo": (np.inf, None), "ell_hi": (-np.inf, None)}
    for t in grid.times():
        b = field.drift(t, lattice)
        sig = field.sigma(t, lattice)
        b_norm = np.linalg.norm(b, axis=1)
        s_norm = spectral_norm(sig)
        eig = np.linalg.eigvalsh(np.einsum("nij,nkj->nik", sig, sig))
        i = int(np.argmax(b_norm))
        if b_norm[i] > worst["k1"][0]:
            worst["k1"] = (float(b_norm[i]), (t, lattice[i]))
        i = int(np.argmax(s_norm))
        if s_norm[i] > worst["k2"][0]:
            worst["k2"] = (float(s_norm[i]), (t, lattice[i]))
        i = int(np.argmin(eig[:, 0]))
        if eig[i, 0] < worst["ell_lo"][0]:
            worst["ell_lo"] = (float(eig[i, 0]), (t, lattice[i]))
        i = int(np.argmax(eig[:, -1]))
        if eig[i, -1] > worst["ell_hi"][0]:
            worst["ell_hi"] = (float(eig[i, -1]), (t, lattice[i]))
        k1_measured = max(k1_measured, float(b_norm.max()))
        k2_measured = max(k2_measured, float(s_norm.max()))
        eig_min = min(eig_min, float(eig[:, 0].min()))
        eig_max = max(eig_max, float(eig[:, -1].max()))

    def _flag(kind: str, key: str, bound: float, exceeded: bool) -> None:
        if exceeded:
            value, (t, x) = worst[key]
            violations.append(Violation(kind=kind, t=float(t), x=[float(v) for v in x], value=value, bound=bound))

    _flag("drift_bound", "k1", field.k1, k1_measured > field.k1 * (1 + _REL_TOL) + 1e-12)
    _flag("diffusion_bound", "k2", field.k2, k2_measured > field.k2 * (1 + _REL_TOL) + 1e-12)
    _flag("ellipticity", "ell_lo", 1.0 / field.lam, eig_min < (1.0 / field.lam) * (1 - _REL_TOL))
    _flag("ellipticity", "ell_hi", field.lam, eig_max > field.lam * (1 + _REL_TOL))

    lat_x, lat_y, lat_t, rnd_x, rnd_y, s, t = sample_pairs(grid, dim, rng)
    gamma = field.gamma
    td = field.time_dependent

    sig_s = eval_grouped(field.sigma, s, rnd_x, td)
    sig_t = eval_grouped(field.sigma, t, rnd_y, td)
    num = spectral_norm(sig_s - sig_t)
    den = np.abs(s - t) ** (gamma / 2.0) + np.linalg.norm(rnd_x - rnd_y, axis=1) ** gamma
    quotient = float(np.max(num / den))

    lat_dist = np.linalg.norm(lat_x - lat_y, axis=1)
    incr = spectral_norm(
        eval_grouped(field.sigma, lat_t, lat_x, td) - eval_grouped(field.sigma, lat_t, lat_y, td)
    )
    exponents = [measure_holder_exponent(lat_dist, incr, grid.distance_bins)]
    if field.regime is Regime.HOLDER:
        b_incr = np.linalg.norm(
            eval_grouped(field.drift, lat_t, lat_x, td) - eval_grouped(field.drift, lat_t, lat_y, td), axis=1
        )
        exponents.append(measure_holder_exponent(lat_dist, b_incr, grid.distance_bins))
    measured = [e for e in exponents if e is not None]
    exponent = min(measured) if measured else None
    if exponent is not None and exponent < gamma - HOLDER_EXPONENT_SLACK:
        violations.append(
            Violation(kind="holder", t=float(lat_t[0]), x=[0.0] * dim, value=exponent, bound=gamma)
        )

    report = ValidationReport(
        model=field.name,
        regime=field.regime.value,
        dim=dim,
        k1_declared=field.k1,
        k1_measured=k1_measured,
        k2_declared=field.k2,
        k2_measured=k2_measured,
        lambda_declared=field.lam,
        ellipticity_min=eig_min,
        ellipticity_max=eig_max,
        holder_quotient=quotient,
        holder_exponent=exponent,
        passed=not violations,
        violations=violations,
    )
    if violations:
        logger.info("model %s: %d assumption violation(s)", field.name, len(violations))
    return report
