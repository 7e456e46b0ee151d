from .potential_service import (
    cosine_amplitudes,
    evaluate,
    evaluate_many,
    full_coefficient,
    full_support,
    make_potential,
    mass,
    scale,
    smoothness_sum,
    truncate,
)

__all__ = [
    'cosine_amplitudes',
    'evaluate',
    'evaluate_many',
    'full_coefficient',
    'full_support',
    'make_potential',
    'mass',
    'scale',
    'smoothness_sum',
    'truncate',
]
