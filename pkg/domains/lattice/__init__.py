from .schemas import BoxDomain, LatticeVector, index_norm_sq
from .services import (
    basis_norm_sq,
    canonical,
    check_order,
    enumerate_lattice,
    frac_norm,
    lattice_indices,
    make_box,
    orbit_size,
    sign_orbit,
    unit_step,
    within_radius,
)

__all__ = [
    'BoxDomain',
    'LatticeVector',
    'index_norm_sq',
    'basis_norm_sq',
    'canonical',
    'check_order',
    'enumerate_lattice',
    'frac_norm',
    'lattice_indices',
    'make_box',
    'orbit_size',
    'sign_orbit',
    'unit_step',
    'within_radius',
]
