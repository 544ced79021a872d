"""Ultrametric diffusion over the p-adic numbers.

Exact p-adic arithmetic, ball-indicator test functions, the truncated-symbol
pseudodifferential operator with its jump kernel, closed-form heat kernels,
skeleton simulation of the associated Markov jump process, and the analytic
plus Monte Carlo first-return pipeline.
"""

from .padic import (
    Ball,
    PAdicScalar,
    additive_character,
    ball_character_integral,
    fractional_part,
    sample_sphere,
    sample_unit_ball,
    shell_character_integral,
)

__version__ = "0.1.0"

__all__ = [
    "Ball",
    "PAdicScalar",
    "additive_character",
    "ball_character_integral",
    "fractional_part",
    "sample_sphere",
    "sample_unit_ball",
    "shell_character_integral",
    "__version__",
]
