from .schemas import (
    COEFFICIENT_CONVENTION,
    BindingReport,
    EigenSolution,
    Match,
    ParsevalReport,
    SpectralBasis,
)
from .services import (
    GalerkinService,
    count_free_eigenvalues,
    expand_index_product,
    kato_pairing,
    product_expand,
    second_order_coefficient,
)
from .repositories import SpectrumRepository

__all__ = [
    'COEFFICIENT_CONVENTION',
    'BindingReport',
    'EigenSolution',
    'Match',
    'ParsevalReport',
    'SpectralBasis',
    'GalerkinService',
    'count_free_eigenvalues',
    'expand_index_product',
    'kato_pairing',
    'product_expand',
    'second_order_coefficient',
    'SpectrumRepository',
]
