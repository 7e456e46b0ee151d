from .perturbation_service import (
    DENOMINATOR_EPS,
    PerturbationService,
    iteration_condition,
    partial_sum_bound,
    term_bound,
)

__all__ = [
    'DENOMINATOR_EPS',
    'PerturbationService',
    'iteration_condition',
    'partial_sum_bound',
    'term_bound',
]
