from .schemas import Index, PotentialSpec
from .services import (
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
from .repositories import PotentialRepository

__all__ = [
    'Index',
    'PotentialSpec',
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
    'PotentialRepository',
]
