from .lattice_service import (
    BOUNDARY_REL_TOL,
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
    'BOUNDARY_REL_TOL',
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
