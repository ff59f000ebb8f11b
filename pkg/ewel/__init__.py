"""
ewel - Euler weak-error laboratory

Simulates the Euler-Maruyama scheme for SDEs with Hölder-continuous or piecewise-smooth
coefficients, measures its weak and density errors against refined couplings, evaluates
the parametrix series for transition densities and reports fitted convergence rates.
"""

from .coefficients import CoefficientField, Regime, list_models, make_model, validate_assumptions
from .euler import GridSchedule, coupled_terminal_states, simulate_batch
from .exceptions import (
    AcceptanceMiss,
    ArgumentError,
    ConfigurationError,
    EwelError,
    MemoryBudgetError,
    NumericalFault,
)
from .models import DensityEstimate, Struct
from .mollifier import mollify
from .parametrix import density_series, density_values
from .weak_error import estimate_weak_error, fit_rate, kde_density, psi

__all__ = [
    "CoefficientField",
    "Regime",
    "list_models",
    "make_model",
    "validate_assumptions",
    "GridSchedule",
    "coupled_terminal_states",
    "simulate_batch",
    "AcceptanceMiss",
    "ArgumentError",
    "ConfigurationError",
    "EwelError",
    "MemoryBudgetError",
    "NumericalFault",
    "DensityEstimate",
    "Struct",
    "mollify",
    "density_series",
    "density_values",
    "estimate_weak_error",
    "fit_rate",
    "kde_density",
    "psi",
]
