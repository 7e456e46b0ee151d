from .schemas import Closure, IterationIdentityReport, SeriesResult, TermEvaluation
from .services import (
    DENOMINATOR_EPS,
    PerturbationService,
    iteration_condition,
    partial_sum_bound,
    term_bound,
)

__all__ = [
    'Closure',
    'IterationIdentityReport',
    'SeriesResult',
    'TermEvaluation',
    'DENOMINATOR_EPS',
    'PerturbationService',
    'iteration_condition',
    'partial_sum_bound',
    'term_bound',
]
