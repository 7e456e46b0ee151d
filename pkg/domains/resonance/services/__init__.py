from .resonance_service import (
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

__all__ = [
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
]
