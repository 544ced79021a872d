"""The truncated-symbol pseudodifferential operator and its jump kernel.

The operator multiplies Fourier transforms by ``max(|xi|, p**r)**alpha -
p**(r*alpha)``; off the Fourier side it acts by integration against a radial
kernel supported on ``|y| <= p**(-r)``.  Both routes are implemented as exact
finite sums on test functions so they can be checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .padic import (
    PAdicScalar,
    is_prime,
    shell_character_integral,
)
from .schwartz import TestFunction

__all__ = [
    "ModelParams",
    "symbol",
    "symbol_radial",
    "jump_kernel",
    "jump_kernel_radial",
    "exit_rate",
    "apply_multiplier",
    "apply_integral",
]


@dataclass(frozen=True, slots=True)
class ModelParams:
    """Model parameters: prime p, integer cutoff exponent r, real exponent alpha.

    The symbol vanishes on ``|xi| <= p**r``; for r < 0 the annulus
    ``1 < |y| <= p**(-r)`` outside the unit ball is where exits happen.
    """

    p: int
    r: int
    alpha: float

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if not isinstance(self.r, int):
            raise ValueError("r must be an integer")
        if isinstance(self.alpha, complex):
            raise ValueError("alpha must be real")
        if not math.isfinite(self.alpha):
            raise ValueError("alpha must be finite")
        object.__setattr__(self, "alpha", float(self.alpha))

    def require_alpha_positive(self) -> None:
        if self.alpha <= 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")

    def require_negative_r(self) -> None:
        if self.r >= 0:
            raise ValueError(
                f"empty annulus: r must be negative (got r={self.r}), "
                "otherwise nothing lies between the unit ball and the jump range"
            )

    def rate(self, m: int) -> float:
        """Symbol value on the shell ``|xi| = p**m`` (0 for m <= r)."""
        if m <= self.r:
            return 0.0
        return float(self.p) ** (m * self.alpha) - float(self.p) ** (self.r * self.alpha)


def symbol_radial(norm_exp: int, params: ModelParams) -> float:
    """``max(|xi|, p**r)**alpha - p**(r*alpha)`` for ``|xi| = p**norm_exp``."""
    params.require_alpha_positive()
    p, r, alpha = params.p, params.r, params.alpha
    top = max(norm_exp, r)
    return float(p) ** (top * alpha) - float(p) ** (r * alpha)


def symbol(xi: PAdicScalar, params: ModelParams) -> float:
    """Symbol at a point; exactly zero on ``|xi| <= p**r``."""
    params.require_alpha_positive()
    if xi.is_zero:
        return 0.0
    return symbol_radial(-int(xi.valuation), params)


def jump_kernel_radial(norm_exp: int, params: ModelParams) -> float:
    """Radial kernel value on the shell ``|y| = p**norm_exp``.

    Defined for alpha > 0 (where it is negative on every shell of the
    annulus outside the unit ball) and for alpha == -1 (logarithmic branch).
    Vanishes for ``|y| > p**(-r)``.
    """
    p, r, alpha = params.p, params.r, params.alpha
    if alpha == 0:
        raise ValueError("alpha == 0 has a pure point kernel; no pointwise value")
    if alpha != -1 and alpha <= 0:
        raise ValueError(f"kernel implemented for alpha > 0 or alpha == -1, got {alpha}")
    if norm_exp > -r:
        return 0.0
    if alpha == -1:
        return (1.0 - 1.0 / p) * ((1 - r) - norm_exp)
    pa = float(p) ** alpha
    head = (1.0 - pa) / (1.0 - float(p) ** (-alpha - 1.0)) * float(p) ** (
        -norm_exp * (alpha + 1.0)
    )
    tail = float(p) ** (r * (alpha + 1.0)) * (1.0 - pa) / (1.0 - float(p) ** (alpha + 1.0))
    return head + tail


def jump_kernel(y: PAdicScalar, params: ModelParams) -> float:
    """Kernel at a point y != 0 (the kernel is singular at the origin)."""
    if y.is_zero:
        raise ValueError("jump kernel is singular at 0")
    return jump_kernel_radial(-int(y.valuation), params)


def exit_rate(params: ModelParams) -> float:
    """Rate of leaving the unit ball: minus the kernel mass of the annulus
    ``1 < |y| <= p**(-r)``.

    A finite shell sum; always strictly between 0 and 1.
    """
    params.require_alpha_positive()
    params.require_negative_r()
    p = params.p
    total = 0.0
    for j in range(1, -params.r + 1):
        measure = float(p) ** j * (1.0 - 1.0 / p)
        total -= jump_kernel_radial(j, params) * measure
    return total


def apply_multiplier(phi: TestFunction, x: PAdicScalar, params: ModelParams) -> complex:
    """Operator applied through the Fourier multiplier, as an exact finite sum.

    Each ball term of phi transforms to a character times a ball cutoff, so
    the inverse transform reduces to shell character integrals weighted by
    the symbol; shells with ``|xi| <= p**r`` drop out.
    """
    params.require_alpha_positive()
    p, r = params.p, params.r
    total = 0j
    for c, ball in phi.terms:
        hi = -ball.radius_exp
        if hi <= r:
            continue
        shift = x - ball.center
        weight = c * float(p) ** ball.radius_exp
        for m in range(r + 1, hi + 1):
            s = shell_character_integral(m, shift)
            if s != 0.0:
                total += weight * params.rate(m) * s
    return total


def apply_integral(phi: TestFunction, x: PAdicScalar, params: ModelParams) -> complex:
    """Operator applied through its integral representation.

    Splits ``|y| <= p**(-r)`` into shells down to the constancy scale of phi
    (below which the increments cancel), refines each shell into cosets on
    which ``phi(x - .)`` is constant, and sums the two weighted difference
    integrals exactly.
    """
    params.require_alpha_positive()
    p, r, alpha = params.p, params.r, params.alpha
    gamma = phi.constancy_exp
    phi_x = phi(x)
    flat = 0j  # ∫ (phi(x-y) - phi(x)) dy
    weighted = 0j  # ∫ (phi(x-y) - phi(x)) / |y|**(alpha+1) dy
    coset_measure = float(p) ** gamma
    for j in range(gamma + 1, -r + 1):
        shell_weight = float(p) ** (-j * (alpha + 1.0))
        step = Fraction(p) ** (-j)
        for m in range(1, p ** (j - gamma)):
            if m % p == 0:
                continue
            y0 = PAdicScalar(p, m * step)
            diff = phi(x - y0) - phi_x
            if diff == 0:
                continue
            flat += diff * coset_measure
            weighted += diff * coset_measure * shell_weight
    front = (1.0 - float(p) ** alpha) / (1.0 - float(p) ** (alpha + 1.0))
    return front * (
        float(p) ** (r * (alpha + 1.0)) * flat - float(p) ** (alpha + 1.0) * weighted
    )
