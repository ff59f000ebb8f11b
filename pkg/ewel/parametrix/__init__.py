"""Parametrix series for transition densities: Gaussian proxies, kernels, convolutions."""

from ._kernel import chain_kernel_values, euler_chain_kernel, kernel_H, kernel_values
from ._memo import TableCache, TableCacheConfig, get_table_cache_config, set_table_cache_config, table_key
from ._proxy import GaussianProxy, chain_covariance, covariance_integral, ou_density, proxy_density
from ._quadrature import QuadratureConfig, graded_time_rule, grading_power, hermite_rule
from ._series import (
    CONTINUOUS,
    DISCRETE,
    EULER,
    MAX_ORDER,
    MODES,
    DecayCheck,
    Envelope,
    SeriesAccumulator,
    SeriesEngine,
    aronson_envelope,
    convolve_step,
    density_series,
    density_values,
    engine_for,
    series_mass,
    tail_estimate,
    term_bound,
    term_decay_check,
)

__all__ = [
    "chain_kernel_values",
    "euler_chain_kernel",
    "kernel_H",
    "kernel_values",
    "TableCache",
    "TableCacheConfig",
    "get_table_cache_config",
    "set_table_cache_config",
    "table_key",
    "GaussianProxy",
    "chain_covariance",
    "covariance_integral",
    "ou_density",
    "proxy_density",
    "QuadratureConfig",
    "graded_time_rule",
    "grading_power",
    "hermite_rule",
    "CONTINUOUS",
    "DISCRETE",
    "EULER",
    "MAX_ORDER",
    "MODES",
    "DecayCheck",
    "Envelope",
    "SeriesAccumulator",
    "SeriesEngine",
    "aronson_envelope",
    "convolve_step",
    "density_series",
    "density_values",
    "engine_for",
    "series_mass",
    "tail_estimate",
    "term_bound",
    "term_decay_check",
]
