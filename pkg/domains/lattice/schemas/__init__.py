from .lattice_schema import BoxDomain, LatticeVector, index_norm_sq

__all__ = ['BoxDomain', 'LatticeVector', 'index_norm_sq']
