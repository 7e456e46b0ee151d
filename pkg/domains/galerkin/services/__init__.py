from .galerkin_service import (
    GalerkinService,
    count_free_eigenvalues,
    expand_index_product,
    kato_pairing,
    product_expand,
    second_order_coefficient,
)

__all__ = [
    'GalerkinService',
    'count_free_eigenvalues',
    'expand_index_product',
    'kato_pairing',
    'product_expand',
    'second_order_coefficient',
]
