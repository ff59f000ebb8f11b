# Deviation and derivative-growth measurements of mollified coefficients.

import itertools
import logging
from math import comb
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..coefficients import CoefficientField, Regime, SampleGrid, eval_grouped, sample_pairs, spectral_norm
from ..exceptions import ArgumentError, ConfigurationError
from ..models import Struct
from ._field import MollifiedField
from ._holder import DEFAULT_NODES, mollify_holder
from ._piecewise import mollify_piecewise

logger = logging.getLogger(__name__)

MAX_DERIVATIVE_ORDER = 4
UNRESOLVED_STEP_FRACTION = 0.25


class DeviationReport(Struct):
    epsilon: float
    delta_b: float
    delta_sigma: float
    delta_sigma_eta: Optional[float]
    eta: Optional[float]


class DerivativeReport(Struct):
    epsilon: float
    alpha: List[int]
    step: float
    max_drift: float
    max_sigma: float


class ScanRow(Struct):
    epsilon: float
    quantity: str
    value: float


def sup_deviation(
    field: CoefficientField,
    mollified: MollifiedField,
    grid: Optional[SampleGrid] = None,
    eta: Optional[float] = None,
) -> DeviationReport:
    """Sampled sup |b - b_eps|, sup |sigma - sigma_eps| and the eta-Hölder seminorm of sigma - sigma_eps."""
    grid = grid or SampleGrid()
    lattice = grid.lattice(field.dim)
    delta_b = delta_sigma = 0.0
    for t in grid.times():
        db = field.drift(t, lattice) - mollified.drift(t, lattice)
        ds = field.sigma(t, lattice) - mollified.sigma(t, lattice)
        delta_b = max(delta_b, float(np.max(np.linalg.norm(db, axis=1))))
        delta_sigma = max(delta_sigma, float(np.max(spectral_norm(ds))))

    seminorm = None
    if eta is not None:
        if not 0.0 < eta < field.gamma:
            raise ArgumentError(f"eta must lie in (0, gamma={field.gamma:g}), got {eta}")
        rng = np.random.default_rng(grid.seed)
        _, _, _, x, y, s, t = sample_pairs(grid, field.dim, rng)
        td = field.time_dependent

        def gap(times: np.ndarray, pts: np.ndarray) -> np.ndarray:
            return eval_grouped(field.sigma, times, pts, td) - eval_grouped(mollified.sigma, times, pts, td)

        num = spectral_norm(gap(s, x) - gap(t, y))
        den = np.abs(s - t) ** (eta / 2.0) + np.linalg.norm(x - y, axis=1) ** eta
        seminorm = float(np.max(num / den))
    return DeviationReport(
        epsilon=mollified.epsilon,
        delta_b=delta_b,
        delta_sigma=delta_sigma,
        delta_sigma_eta=seminorm,
        eta=eta,
    )


def integration_box(field: CoefficientField, eps: float, radius: float) -> Tuple[np.ndarray, np.ndarray]:
    """Bounding box of the discontinuity set inflated by 3 eps, clipped to [-radius, radius]^d."""
    lo = np.full(field.dim, -radius)
    hi = np.full(field.dim, radius)
    if field.discontinuities is not None:
        box = field.discontinuities.bounding_box()
        if box is not None:
            lo = np.maximum(lo, box[0] - 3.0 * eps)
            hi = np.minimum(hi, box[1] + 3.0 * eps)
    return lo, hi


def lq_deviation(
    field: CoefficientField,
    mollified: MollifiedField,
    q: float,
    horizon: float,
    radius: float = 3.0,
    cells_per_eps: Optional[int] = None,
    time_cells: int = 16,
) -> float:
    """Midpoint-rule value of (int_0^T int |b - b_eps|^q dx dt)^{1/q} on the inflated box."""
    if q <= field.dim:
        raise ConfigurationError(
            f"q must exceed the dimension d={field.dim}, got q={q}",
            context={"field": "mollifier.q"},
        )
    eps = mollified.epsilon
    if cells_per_eps is None:
        cells_per_eps = {1: 200, 2: 40, 3: 12}[field.dim]
    lo, hi = integration_box(field, eps, radius)
    h = eps / cells_per_eps
    axes = []
    for a, b in zip(lo, hi):
        n = max(1, int(np.ceil((b - a) / h)))
        axes.append(a + (np.arange(n) + 0.5) * (b - a) / n)
    cell = float(np.prod((hi - lo) / np.array([ax.size for ax in axes])))
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.reshape(-1) for m in mesh], axis=1)

    if field.time_dependent:
        times = (np.arange(time_cells) + 0.5) * horizon / time_cells
        dt = horizon / time_cells
    else:
        times, dt = np.array([0.0]), horizon
    total = 0.0
    for t in times:
        diff = np.linalg.norm(field.drift(t, pts) - mollified.drift(t, pts), axis=1)
        total += float(np.sum(diff**q)) * cell * dt
    return total ** (1.0 / q)


def _difference_stencil(order: int) -> List[Tuple[float, float]]:
    """Central difference of the given order: offsets (in steps) and coefficients."""
    return [((order / 2.0 - j), (-1.0) ** j * comb(order, j)) for j in range(order + 1)]


def derivative_blowup_scan(
    mollified: MollifiedField,
    alpha: Sequence[int],
    grid: Optional[SampleGrid] = None,
    step: Optional[float] = None,
) -> DerivativeReport:
    """Max of |D^alpha b_eps| and |D^alpha sigma_eps| on the lattice by central finite differences."""
    alpha = [int(a) for a in alpha]
    if len(alpha) != mollified.dim or any(a < 0 for a in alpha):
        raise ArgumentError(f"multi-index {alpha} does not match dim={mollified.dim}")
    order = sum(alpha)
    if order > MAX_DERIVATIVE_ORDER:
        raise ArgumentError(f"derivative order {order} exceeds {MAX_DERIVATIVE_ORDER}")
    eps = mollified.epsilon
    step = eps / 20.0 if step is None else float(step)
    if step <= 0.0 or step >= UNRESOLVED_STEP_FRACTION * eps:
        raise ConfigurationError(
            f"finite-difference step {step:g} does not resolve eps={eps:g}",
            context={"step": step, "epsilon": eps},
        )
    grid = grid or SampleGrid()
    lattice = grid.lattice(mollified.dim)
    stencils = [_difference_stencil(a) for a in alpha]
    scale = step ** (-order)

    max_b = max_s = 0.0
    for t in grid.times():
        db = np.zeros((lattice.shape[0], mollified.dim))
        ds = np.zeros((lattice.shape[0], mollified.dim, mollified.dim))
        for combo in itertools.product(*stencils):
            offset = np.array([c[0] for c in combo]) * step
            coef = float(np.prod([c[1] for c in combo]))
            pts = lattice + offset
            db += coef * mollified.drift(t, pts)
            ds += coef * mollified.sigma(t, pts)
        max_b = max(max_b, float(np.max(np.linalg.norm(db, axis=1))) * scale)
        max_s = max(max_s, float(np.max(spectral_norm(ds))) * scale)
        if not mollified.time_dependent:
            break
    return DerivativeReport(epsilon=eps, alpha=alpha, step=step, max_drift=max_b, max_sigma=max_s)


def mollify(
    field: CoefficientField, eps: float, nodes: int = DEFAULT_NODES, horizon: Optional[float] = None
) -> MollifiedField:
    """Pick the procedure matching the field's regime."""
    if field.regime is Regime.HOLDER:
        return mollify_holder(field, eps, nodes=nodes, horizon=horizon)
    return mollify_piecewise(field, eps)


def mollifier_scan(
    field: CoefficientField,
    epsilons: Iterable[float],
    grid: Optional[SampleGrid] = None,
    eta: Optional[float] = None,
    q: Optional[float] = None,
    horizon: float = 1.0,
    orders: Sequence[int] = (1,),
    nodes: int = 24,
) -> List[ScanRow]:
    """Deviation and derivative rows for each radius, plus ratios between consecutive radii.

    Ratio rows carry the larger radius of the pair in ``epsilon`` and are named
    ``<quantity>_ratio`` (value at eps_k divided by value at eps_{k+1} for deviations,
    the inverse for derivative maxima, so both read as growth factors).
    """
    grid = grid or SampleGrid()
    epsilons = sorted((float(e) for e in epsilons), reverse=True)
    rows: List[ScanRow] = []
    per_eps = []
    for eps in epsilons:
        molly = mollify(field, eps, nodes=nodes, horizon=horizon)
        values = {}
        dev = sup_deviation(field, molly, grid, eta if field.regime is Regime.HOLDER else None)
        values["delta_b"] = dev.delta_b
        values["delta_sigma"] = dev.delta_sigma
        if dev.delta_sigma_eta is not None:
            values["delta_sigma_eta"] = dev.delta_sigma_eta
        if q is not None:
            values["lq_deviation"] = lq_deviation(field, molly, q, horizon, radius=grid.radius)
        for order in orders:
            alpha = [order] + [0] * (field.dim - 1)
            der = derivative_blowup_scan(molly, alpha, grid)
            values[f"deriv{order}_drift"] = der.max_drift
            values[f"deriv{order}_sigma"] = der.max_sigma
        logger.info("mollifier scan %s eps=%g: %s", field.name, eps, values)
        rows.extend(ScanRow(epsilon=eps, quantity=k, value=v) for k, v in values.items())
        per_eps.append((eps, values))

    for (eps_a, a), (_, b) in zip(per_eps, per_eps[1:]):
        for key in a:
            num, den = (b[key], a[key]) if key.startswith("deriv") else (a[key], b[key])
            if den > 0.0:
                rows.append(ScanRow(epsilon=eps_a, quantity=f"{key}_ratio", value=num / den))
    return rows
