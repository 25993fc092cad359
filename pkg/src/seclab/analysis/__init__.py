"""Analytic bounds and exact oracles."""

from .bounds import (
    BoundResult,
    CoefficientSet,
    bound_f,
    bound_f_k2,
    coefficients,
    finite_ratio_k2,
    golden_section_max,
    not_full_probability,
    optimal_alpha,
    optimal_threshold,
    recurrence_residuals,
    virtual_plus_ratio,
)
from .oracle import (
    EnumerationReport,
    classical_secretary_probability,
    enumerate_exact,
    selection_count_distribution,
)
from .stochastic import GapError, log_stochastic_factor, min_gap, stochastic_factor

__all__ = [
    "BoundResult",
    "CoefficientSet",
    "EnumerationReport",
    "GapError",
    "bound_f",
    "bound_f_k2",
    "classical_secretary_probability",
    "coefficients",
    "enumerate_exact",
    "finite_ratio_k2",
    "golden_section_max",
    "log_stochastic_factor",
    "min_gap",
    "not_full_probability",
    "optimal_alpha",
    "optimal_threshold",
    "recurrence_residuals",
    "selection_count_distribution",
    "stochastic_factor",
    "virtual_plus_ratio",
]
