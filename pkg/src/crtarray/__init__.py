"""Sparse 2D sensor arrays from coprime quadratic integers."""

from .rings import (EISENSTEIN, GAUSSIAN, QuadInt, RingSpec, coprime_oracle, get_ring,
                    is_coprime, norm, split_prime)
from .designs import (SensorArray, a2_cross, build, cross_array, hscrt, nested_2d,
                      q_tuple_crt, spinner_array, t_array, z2_cross)
from .coarray import (Coarray, difference_coarray, essential_set, fragility,
                      hole_free_check, sum_coarray)

__version__ = "0.1.0"

__all__ = [
    "EISENSTEIN", "GAUSSIAN", "QuadInt", "RingSpec", "coprime_oracle", "get_ring",
    "is_coprime", "norm", "split_prime", "SensorArray", "a2_cross", "build",
    "cross_array", "hscrt", "nested_2d", "q_tuple_crt", "spinner_array", "t_array",
    "z2_cross", "Coarray", "difference_coarray", "essential_set", "fragility",
    "hole_free_check", "sum_coarray", "__version__",
]
