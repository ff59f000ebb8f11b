# Coupled weak-error estimators: E f(X_T^h) - E f(X_T^{h/F}) on a common Brownian path.

import logging
from typing import Any, List, Optional, Sequence

import numpy as np

from ..coefficients import CoefficientField, as_points
from ..euler import GridSchedule, SimulationConfig, coupled_terminal_states, strong_error
from ..exceptions import ArgumentError
from ..models import Struct
from ._fit import RateFit, fit_rate
from ._rates import admissible_indicator_distance
from ._sweep import DEFAULT_REFINEMENT, EXCLUDED_NEAR_BOUNDARY, SweepRow, flag_series, grid_for_h
from ._test_functions import TestFunction, TestFunctionKind

logger = logging.getLogger(__name__)

MIN_REFINEMENT = 16

_BOUNDARY_KINDS = (TestFunctionKind.INDICATOR, TestFunctionKind.SMOOTH_INDICATOR)


class WeakErrorEstimate(Struct):
    model: str
    test_function: str
    h: float
    refinement_factor: int
    m_paths: int
    error: float
    stderr: float
    coarse_mean: float
    fine_mean: float

    def sweep_row(self) -> SweepRow:
        return SweepRow(
            model=self.model,
            h=self.h,
            epsilon=None,
            test_function=self.test_function,
            error=self.error,
            stderr=self.stderr,
        )


def _coupled_pair(
    field: CoefficientField,
    x0: Any,
    grid: GridSchedule,
    refinement_factor: int,
    m: int,
    seed: int,
    config: Optional[SimulationConfig],
) -> np.ndarray:
    if refinement_factor < MIN_REFINEMENT:
        raise ArgumentError(
            f"refinement factor must be at least {MIN_REFINEMENT} for a usable reference, got {refinement_factor}"
        )
    legs = [(field, 1), (field, refinement_factor)]
    return coupled_terminal_states(legs, x0, grid, m, seed, refinement=refinement_factor, config=config)


def _estimate(field: CoefficientField, f: TestFunction, grid: GridSchedule, factor: int, terminal: np.ndarray) -> WeakErrorEstimate:
    coarse = f(terminal[0])
    fine = f(terminal[1])
    gap = coarse - fine
    m = gap.size
    return WeakErrorEstimate(
        model=field.name,
        test_function=f.label,
        h=grid.h,
        refinement_factor=factor,
        m_paths=m,
        error=float(gap.mean()),
        stderr=float(gap.std(ddof=1) / np.sqrt(m)) if m > 1 else 0.0,
        coarse_mean=float(coarse.mean()),
        fine_mean=float(fine.mean()),
    )


def estimate_weak_error(
    field: CoefficientField,
    f: TestFunction,
    x0: Any,
    grid_coarse: GridSchedule,
    refinement_factor: int,
    m: int,
    seed: int,
    config: Optional[SimulationConfig] = None,
) -> WeakErrorEstimate:
    """Coupled estimate of E f(X_T^h) - E f(X_T^{h/factor}) with the standard error of the difference."""
    return estimate_weak_errors(field, [f], x0, grid_coarse, refinement_factor, m, seed, config)[0]


def estimate_weak_errors(
    field: CoefficientField,
    tests: Sequence[TestFunction],
    x0: Any,
    grid_coarse: GridSchedule,
    refinement_factor: int,
    m: int,
    seed: int,
    config: Optional[SimulationConfig] = None,
) -> List[WeakErrorEstimate]:
    """One coupled simulation shared by several test functions."""
    terminal = _coupled_pair(field, x0, grid_coarse, refinement_factor, m, seed, config)
    estimates = [_estimate(field, f, grid_coarse, refinement_factor, terminal) for f in tests]
    for est in estimates:
        logger.debug("weak error %s %s h=%g: %.3e +- %.1e", est.model, est.test_function, est.h, est.error, est.stderr)
    return estimates


def weak_error_cell(
    field: CoefficientField,
    tests: Sequence[TestFunction],
    x0: Any,
    horizon: float,
    h: float,
    m: int,
    seed: int,
    refinement_factor: int = DEFAULT_REFINEMENT,
    config: Optional[SimulationConfig] = None,
) -> List[SweepRow]:
    """Weak errors of every test function at one step size.

    Indicator-type functions whose boundary lies closer to x0 than sqrt(T) h^(gamma/2)
    are not estimated; their row carries NaN values and the exclusion flag.
    """
    grid = grid_for_h(horizon, h)
    start = as_points(x0, field.dim)
    admissible = admissible_indicator_distance(horizon, h, field.gamma)
    kept, rows = [], []
    for f in tests:
        if f.kind in _BOUNDARY_KINDS and float(f.boundary_distance(start)[0]) < admissible:
            logger.info("skipping %s at h=%g: x0 within %.3g of the boundary", f.label, h, admissible)
            rows.append(
                SweepRow(
                    model=field.name,
                    h=float(h),
                    epsilon=None,
                    test_function=f.label,
                    error=float("nan"),
                    stderr=float("nan"),
                    flags=EXCLUDED_NEAR_BOUNDARY,
                )
            )
        else:
            kept.append(f)
    if kept:
        estimates = estimate_weak_errors(field, kept, x0, grid, refinement_factor, m, seed, config)
        rows.extend(est.sweep_row() for est in estimates)
    return rows


def weak_error_sweep(
    field: CoefficientField,
    tests: Sequence[TestFunction],
    x0: Any,
    h_list: Sequence[float],
    m: int,
    seed: int,
    horizon: float = 1.0,
    refinement_factor: int = DEFAULT_REFINEMENT,
    config: Optional[SimulationConfig] = None,
) -> List[SweepRow]:
    rows: List[SweepRow] = []
    for h in sorted(h_list, reverse=True):
        rows.extend(weak_error_cell(field, tests, x0, horizon, h, m, seed, refinement_factor, config))
    return flag_series(rows)


def strong_rate_check(
    field: CoefficientField,
    x0: Any,
    h_list: Sequence[float],
    m: int,
    seed: int,
    horizon: float = 1.0,
    refinement_factor: int = MIN_REFINEMENT,
    config: Optional[SimulationConfig] = None,
) -> RateFit:
    """Fit of E|X_T^h - X_T^{h/F}| against h; about 1/2 for smooth coefficients."""
    points = []
    for h in sorted(h_list, reverse=True):
        terminal = _coupled_pair(field, x0, grid_for_h(horizon, h), refinement_factor, m, seed, config)
        err = strong_error(terminal[0], terminal[1])
        points.append((h, err.value, err.stderr))
    return fit_rate(points)
