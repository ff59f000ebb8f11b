"""Coefficient fields, discontinuity manifolds, the model zoo and assumption checks."""

from ._field import CoefficientField, Evaluator, Regime
from ._manifolds import (
    DiscontinuitySet,
    HyperplaneManifold,
    Manifold,
    PointManifold,
    SphereManifold,
    as_points,
    make_manifold,
    project,
    signed_distance,
)
from ._validation import (
    SampleGrid,
    ValidationReport,
    Violation,
    eval_grouped,
    measure_holder_exponent,
    sample_pairs,
    spectral_norm,
    validate_assumptions,
)
from ._weierstrass import WeierstrassTable, weierstrass, weierstrass_sup, weierstrass_table
from ._zoo import ModelEntry, list_models, make_model

__all__ = [
    "CoefficientField",
    "Evaluator",
    "Regime",
    "DiscontinuitySet",
    "Manifold",
    "PointManifold",
    "HyperplaneManifold",
    "SphereManifold",
    "as_points",
    "make_manifold",
    "project",
    "signed_distance",
    "SampleGrid",
    "ValidationReport",
    "Violation",
    "measure_holder_exponent",
    "eval_grouped",
    "sample_pairs",
    "spectral_norm",
    "validate_assumptions",
    "WeierstrassTable",
    "weierstrass",
    "weierstrass_sup",
    "weierstrass_table",
    "ModelEntry",
    "list_models",
    "make_model",
]
