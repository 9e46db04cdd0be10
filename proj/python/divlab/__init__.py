"""Divergence-measure field laboratory."""

from ._divlab import (
    DomainError,
    Error,
    PreconditionError,
    UsageError,
    VectorField,
    auto_gamma,
    ball_average,
    certify,
    field_registry,
    flow_tube,
    gamma_bounds,
    make_field,
    numeric_divergence,
    quadratic_margin,
    recipes,
    run_cli,
    run_operation,
    separable,
    strip_identity,
)

__all__ = [
    "DomainError",
    "Error",
    "PreconditionError",
    "UsageError",
    "VectorField",
    "auto_gamma",
    "ball_average",
    "certify",
    "field_registry",
    "flow_tube",
    "gamma_bounds",
    "make_field",
    "numeric_divergence",
    "quadratic_margin",
    "recipes",
    "run_cli",
    "run_operation",
    "separable",
    "strip_identity",
]
