"""Mollification of coefficient fields and the deviation/derivative scans."""

from ._field import BLEND_SLACK, MollifiedField, MollifyMethod, SplineEvaluator
from ._holder import DEFAULT_NODES, SpatialConvolution, TimeConvolution, mollify_holder, reflect_time
from ._kernel import MIN_NODES, MollifierKernel, bump, radial_moment
from ._piecewise import BlendedDrift, blend_weight, mollify_piecewise
from ._scans import (
    DerivativeReport,
    DeviationReport,
    ScanRow,
    derivative_blowup_scan,
    integration_box,
    lq_deviation,
    mollifier_scan,
    mollify,
    sup_deviation,
)

__all__ = [
    "BLEND_SLACK",
    "MollifiedField",
    "MollifyMethod",
    "SplineEvaluator",
    "DEFAULT_NODES",
    "SpatialConvolution",
    "TimeConvolution",
    "mollify_holder",
    "reflect_time",
    "MIN_NODES",
    "MollifierKernel",
    "bump",
    "radial_moment",
    "BlendedDrift",
    "blend_weight",
    "mollify_piecewise",
    "DerivativeReport",
    "DeviationReport",
    "ScanRow",
    "derivative_blowup_scan",
    "integration_box",
    "lq_deviation",
    "mollifier_scan",
    "mollify",
    "sup_deviation",
]
