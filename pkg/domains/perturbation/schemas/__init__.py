from .perturbation_schema import (
    Closure,
    IterationIdentityReport,
    SeriesResult,
    TermEvaluation,
)

__all__ = ['Closure', 'IterationIdentityReport', 'SeriesResult', 'TermEvaluation']
