"""
Domain packages: lattice, potential, resonance, perturbation, galerkin.
"""
