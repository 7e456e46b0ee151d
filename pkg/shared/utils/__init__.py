from .spectral_math import (
    fractional_power,
    power_gap,
    exact_sum,
    gauss_legendre_grid,
    shell_samples,
    block_rng,
)
from .error_handlers import *
