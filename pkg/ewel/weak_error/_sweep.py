# Density-error sweeps over step sizes: scheme against a refined scheme, or the
# mollified decomposition p - p_h = (p - p_eps) + (p_eps - p_eps^h) + (p_eps^h - p_h).

import logging
import math
from collections import defaultdict
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from ..coefficients import CoefficientField, Regime, as_points
from ..euler import GridSchedule, SimulationConfig, coupled_terminal_states
from ..exceptions import ConfigurationError
from ..models import Struct
from ..mollifier import mollify
from ._kde import SILVERMAN_SCALE, kde_difference, silverman_bandwidth
from ._rates import epsilon_schedule, eta_schedule

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ("model", "h", "epsilon", "test_function", "error", "stderr", "bias_bound", "flags")
DEFAULT_REFINEMENT = 64
DISTANCE_TOLERANCE = 1e-9

NOISE_DOMINATED = "noise-dominated"
BIAS_LIMITED = "bias-limited"
EXCLUDED_NEAR_BOUNDARY = "excluded-near-boundary"


class DensityMode(str, Enum):
    SCHEME_VS_FINE = "scheme_vs_fine"
    DECOMPOSITION = "decomposition"


class SweepRow(Struct):
    model: str
    h: float
    epsilon: Optional[float]
    test_function: str
    error: float
    stderr: float
    bias_bound: Optional[float] = None
    flags: str = ""

    def csv_row(self) -> Dict[str, Any]:
        return {name: getattr(self, name) for name in SWEEP_COLUMNS}


class ScheduleRow(Struct):
    h: float
    eta: float
    epsilon: float


def grid_for_h(horizon: float, h: float) -> GridSchedule:
    steps = int(round(horizon / h))
    if steps < 1 or abs(steps * h - horizon) > 1e-9 * horizon:
        raise ConfigurationError(f"step {h!r} does not divide the horizon {horizon!r}")
    return GridSchedule(horizon, steps)


def _add_flag(row: SweepRow, flag: str) -> None:
    flags = set(filter(None, row.flags.split(";")))
    flags.add(flag)
    row.flags = ";".join(sorted(flags))


def flag_series(rows: Sequence[SweepRow]) -> List[SweepRow]:
    """Mark whole (model, test function) series that noise or KDE bias cannot resolve."""
    series: Dict[tuple, List[SweepRow]] = defaultdict(list)
    for row in rows:
        if math.isfinite(row.error):
            series[(row.model, row.test_function)].append(row)
    for key, members in series.items():
        if all(r.stderr > abs(r.error) for r in members):
            for r in members:
                _add_flag(r, NOISE_DOMINATED)
        smallest = min(abs(r.error) for r in members)
        if any(r.bias_bound is not None and r.bias_bound > 0.5 * smallest for r in members):
            logger.warning("density series %s is bias-limited (smallest error %.3e)", key, smallest)
            for r in members:
                _add_flag(r, BIAS_LIMITED)
    return sorted(rows, key=lambda r: (r.model, r.test_function, -r.h))


def density_label(y: np.ndarray) -> str:
    return "density(y=" + ",".join(f"{v:g}" for v in y) + ")"


def check_declared_distances(field: CoefficientField, y_points: np.ndarray, distances: Optional[Sequence[float]]) -> None:
    """Piecewise-smooth sweeps must declare d(y, I) for every evaluation point."""
    if field.regime is not Regime.PIECEWISE_SMOOTH:
        return
    if distances is None or len(distances) != y_points.shape[0]:
        raise ConfigurationError(
            f"model {field.name!r} is piecewise smooth: declare d(y, I) for each of the {y_points.shape[0]} point(s)"
        )
    actual = field.discontinuities.distance(y_points)
    for y, declared, measured in zip(y_points, distances, actual):
        if abs(declared - measured) > DISTANCE_TOLERANCE * max(1.0, measured):
            raise ConfigurationError(
                f"declared distance {declared!r} of y={y.tolist()} to the discontinuities differs from {measured!r}"
            )


def schedule_rows(h_list: Sequence[float], dt: float, gamma: float, log_c_eta: float = 0.0) -> List[ScheduleRow]:
    rows = []
    for h in sorted(h_list, reverse=True):
        eta = eta_schedule(h, gamma)
        rows.append(ScheduleRow(h=float(h), eta=eta, epsilon=epsilon_schedule(h, dt, gamma, eta, log_c_eta)))
    return rows


def _mollified_leg(field: CoefficientField, epsilon: float, horizon: float, nodes: int):
    moll = mollify(field, epsilon, nodes=nodes, horizon=horizon)
    if field.dim == 1 and not field.time_dependent and moll.quadrature_nodes:
        return moll.tabulated()
    return moll


def density_error_cell(
    field: CoefficientField,
    x0: Any,
    y_points: Any,
    horizon: float,
    h: float,
    mode: Union[DensityMode, str],
    m: int,
    seed: int,
    refinement_factor: int = DEFAULT_REFINEMENT,
    epsilon: Optional[float] = None,
    bandwidth: Optional[Union[float, Sequence[float]]] = None,
    bandwidth_scale: float = SILVERMAN_SCALE,
    quadrature_nodes: int = 24,
    config: Optional[SimulationConfig] = None,
) -> List[SweepRow]:
    """Density errors at every y for one step size; rows carry no series flags yet."""
    mode = DensityMode(mode)
    grid = grid_for_h(horizon, h)
    ys = as_points(y_points, field.dim)
    if mode is DensityMode.SCHEME_VS_FINE:
        legs = [(field, 1), (field, refinement_factor)]
        names = {("scheme", "fine"): None}
    else:
        if epsilon is None:
            raise ConfigurationError("decomposition mode needs a mollification radius")
        moll = _mollified_leg(field, epsilon, horizon, quadrature_nodes)
        legs = [(field, refinement_factor), (moll, refinement_factor), (moll, 1), (field, 1)]
        names = {
            ("p", "p_eps"): "p-p_eps",
            ("p_eps", "p_eps_h"): "p_eps-p_eps_h",
            ("p_eps_h", "p_h"): "p_eps_h-p_h",
            ("p", "p_h"): "p-p_h",
        }
    terminal = coupled_terminal_states(legs, x0, grid, m, seed, refinement=refinement_factor, config=config)
    if mode is DensityMode.SCHEME_VS_FINE:
        laws = {"scheme": terminal[0], "fine": terminal[1]}
        reference = laws["fine"]
    else:
        laws = dict(zip(("p", "p_eps", "p_eps_h", "p_h"), terminal))
        reference = laws["p"]
    bw = silverman_bandwidth(reference, bandwidth_scale) if bandwidth is None else bandwidth
    rows: List[SweepRow] = []
    for (a, b), component in names.items():
        diff, stderr, bias = kde_difference(laws[a], laws[b], ys, bw)
        for y, value, err, bound in zip(ys, diff, stderr, bias):
            label = density_label(y) if component is None else f"{density_label(y)}:{component}"
            rows.append(
                SweepRow(
                    model=field.name,
                    h=float(h),
                    epsilon=None if epsilon is None else float(epsilon),
                    test_function=label,
                    error=abs(float(value)),
                    stderr=float(err),
                    bias_bound=float(bound),
                )
            )
    logger.info("density cell %s h=%g (%s): %d row(s)", field.name, h, mode.value, len(rows))
    return rows


def density_error_sweep(
    field: CoefficientField,
    x0: Any,
    y_points: Any,
    h_list: Sequence[float],
    mode: Union[DensityMode, str],
    m: int,
    seed: int,
    horizon: float = 1.0,
    refinement_factor: int = DEFAULT_REFINEMENT,
    epsilon: Optional[Union[float, str]] = None,
    y_distances: Optional[Sequence[float]] = None,
    bandwidth: Optional[Union[float, Sequence[float]]] = None,
    bandwidth_scale: float = SILVERMAN_SCALE,
    quadrature_nodes: int = 24,
    config: Optional[SimulationConfig] = None,
) -> List[SweepRow]:
    """Density errors for every (h, y), flagged per series.

    ``epsilon="schedule"`` picks the radius of each cell from the eta/epsilon balance at
    that step size; a number keeps it fixed across the sweep.
    """
    ys = as_points(y_points, field.dim)
    check_declared_distances(field, ys, y_distances)
    schedule = {}
    if epsilon == "schedule":
        schedule = {row.h: row.epsilon for row in schedule_rows(h_list, horizon, field.gamma)}
    rows: List[SweepRow] = []
    for h in sorted(h_list, reverse=True):
        eps = schedule.get(float(h), epsilon) if schedule else epsilon
        rows.extend(
            density_error_cell(
                field, x0, ys, horizon, h, mode, m, seed,
                refinement_factor=refinement_factor,
                epsilon=eps,
                bandwidth=bandwidth,
                bandwidth_scale=bandwidth_scale,
                quadrature_nodes=quadrature_nodes,
                config=config,
            )
        )
    return flag_series(rows)
