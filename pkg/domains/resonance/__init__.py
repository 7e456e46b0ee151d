from .schemas import (
    SHELL_INNER,
    SHELL_OUTER,
    DomainLabel,
    GridSpec,
    InclusionReport,
    MeasureResult,
    ResonanceParams,
    ScanResult,
)
from .services import (
    ResonanceService,
    band_width,
    classify_many,
    classify_point,
    coordinate_bound,
    coordinate_bound_check,
    default_alpha,
    derive_params,
    gap_matrix,
    mean_value_eta,
    rescale,
    resonance_gap,
    test_set,
)
from .repositories import CSV_HEADER, FigureRepository

__all__ = [
    'SHELL_INNER',
    'SHELL_OUTER',
    'DomainLabel',
    'GridSpec',
    'InclusionReport',
    'MeasureResult',
    'ResonanceParams',
    'ScanResult',
    'ResonanceService',
    'band_width',
    'classify_many',
    'classify_point',
    'coordinate_bound',
    'coordinate_bound_check',
    'default_alpha',
    'derive_params',
    'gap_matrix',
    'mean_value_eta',
    'rescale',
    'resonance_gap',
    'test_set',
    'FigureRepository',
    'CSV_HEADER',
]
