from .galerkin_schema import (
    COEFFICIENT_CONVENTION,
    BindingReport,
    EigenSolution,
    Index,
    Match,
    ParsevalReport,
    SpectralBasis,
)

__all__ = [
    'COEFFICIENT_CONVENTION',
    'BindingReport',
    'EigenSolution',
    'Index',
    'Match',
    'ParsevalReport',
    'SpectralBasis',
]
