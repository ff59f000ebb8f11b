"""Weak and density errors of the Euler scheme, rate fits and closed-form rate formulas."""

from ._estimators import (
    MIN_REFINEMENT,
    WeakErrorEstimate,
    estimate_weak_error,
    estimate_weak_errors,
    strong_rate_check,
    weak_error_cell,
    weak_error_sweep,
)
from ._fit import MIN_FIT_POINTS, RateFit, RatePoint, fit_rate
from ._kde import SILVERMAN_SCALE, kde_density, kde_difference, silverman_bandwidth
from ._rates import (
    PSI_DOMAIN_MAX,
    SensitivityConstant,
    admissible_indicator_distance,
    alpha_q,
    borel_bound_factor,
    epsilon_schedule,
    eta_schedule,
    predicted_order,
    psi,
    sensitivity_constant,
)
from ._sweep import (
    BIAS_LIMITED,
    DEFAULT_REFINEMENT,
    EXCLUDED_NEAR_BOUNDARY,
    NOISE_DOMINATED,
    SWEEP_COLUMNS,
    DensityMode,
    ScheduleRow,
    SweepRow,
    check_declared_distances,
    density_error_cell,
    density_error_sweep,
    density_label,
    flag_series,
    grid_for_h,
    schedule_rows,
)
from ._test_functions import (
    TestFunction,
    TestFunctionKind,
    make_test_function,
    smooth_indicator,
    smooth_indicator_profile,
)

__all__ = [
    "MIN_REFINEMENT",
    "WeakErrorEstimate",
    "estimate_weak_error",
    "estimate_weak_errors",
    "strong_rate_check",
    "weak_error_cell",
    "weak_error_sweep",
    "MIN_FIT_POINTS",
    "RateFit",
    "RatePoint",
    "fit_rate",
    "SILVERMAN_SCALE",
    "kde_density",
    "kde_difference",
    "silverman_bandwidth",
    "PSI_DOMAIN_MAX",
    "SensitivityConstant",
    "admissible_indicator_distance",
    "alpha_q",
    "borel_bound_factor",
    "epsilon_schedule",
    "eta_schedule",
    "predicted_order",
    "psi",
    "sensitivity_constant",
    "BIAS_LIMITED",
    "DEFAULT_REFINEMENT",
    "EXCLUDED_NEAR_BOUNDARY",
    "NOISE_DOMINATED",
    "SWEEP_COLUMNS",
    "DensityMode",
    "ScheduleRow",
    "SweepRow",
    "check_declared_distances",
    "density_error_cell",
    "density_error_sweep",
    "density_label",
    "flag_series",
    "grid_for_h",
    "schedule_rows",
    "TestFunction",
    "TestFunctionKind",
    "make_test_function",
    "smooth_indicator",
    "smooth_indicator_profile",
]
