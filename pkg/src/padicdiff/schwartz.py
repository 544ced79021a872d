"""Test functions: finite complex combinations of p-adic ball indicators.

These are the locally constant, compactly supported functions on Q_p.  Every
one has an exact pointwise Fourier transform (each ball indicator transforms
to a character times a smaller ball indicator), which is what makes operator
identities checkable without quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .padic import Ball, PAdicScalar, additive_character

__all__ = ["TestFunction"]


@dataclass(frozen=True)
class TestFunction:
    """``phi(x) = sum_k c_k * 1[x in B_k]`` over finitely many balls.

    Terms may overlap; :meth:`canonicalize` refines them to pairwise
    disjoint balls of a common radius without changing pointwise values.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    p: int
    terms: tuple[tuple[complex, Ball], ...]

    def __post_init__(self):
        for _, ball in self.terms:
            if ball.p != self.p:
                raise ValueError("ball prime differs from function prime")

    # ---- constructors --------------------------------------------------

    @classmethod
    def indicator(cls, ball: Ball) -> "TestFunction":
        return cls(ball.p, ((complex(1.0), ball),))

    @classmethod
    def unit_ball(cls, p: int) -> "TestFunction":
        """The indicator of the unit ball."""
        return cls.indicator(Ball(PAdicScalar.zero(p), 0))

    @classmethod
    def from_terms(cls, p: int, terms: Iterable[tuple[complex, Ball]]) -> "TestFunction":
        return cls(p, tuple((complex(c), b) for c, b in terms))

    # ---- algebra --------------------------------------------------------

    def __add__(self, other: "TestFunction") -> "TestFunction":
        if self.p != other.p:
            raise ValueError("mismatched primes")
        return TestFunction(self.p, self.terms + other.terms)

    def scaled(self, c: complex) -> "TestFunction":
        return TestFunction(self.p, tuple((c * ck, b) for ck, b in self.terms))

    def __rmul__(self, c: complex) -> "TestFunction":
        return self.scaled(c)

    # ---- structure -------------------------------------------------------

    @property
    def constancy_exp(self) -> int:
        """A radius exponent at which the function is locally constant
        (the smallest radius exponent among the terms)."""
        if not self.terms:
            return 0
        return min(ball.radius_exp for _, ball in self.terms)

    @property
    def support_exp(self) -> int:
        """Radius exponent of a ball containing the support."""
        if not self.terms:
            return 0
        return max(
            max(ball.radius_exp, -_val_floor(ball.center)) for _, ball in self.terms
        )

    # ---- evaluation -------------------------------------------------------

    def evaluate(self, x: PAdicScalar) -> complex:
        total = 0j
        for c, ball in self.terms:
            if ball.contains(x):
                total += c
        return total

    __call__ = evaluate

    def fourier(self, xi: PAdicScalar) -> complex:
        """Exact Fourier transform ``∫ chi(xi*x) phi(x) dx`` at a point.

        Each ball contributes ``c * p**gamma * chi(xi*center)`` on
        ``|xi| <= p**-gamma`` and nothing outside.
        """
        total = 0j
        for c, ball in self.terms:
            if xi.valuation >= ball.radius_exp:
                total += (
                    c
                    * float(self.p) ** ball.radius_exp
                    * additive_character(xi * ball.center)
                )
        return total

    # ---- normal form -------------------------------------------------------

    def canonicalize(self) -> "TestFunction":
        """Equivalent form with pairwise disjoint balls of one common radius.

        Refines every ball to the smallest radius exponent present, merges
        coefficients on identical cosets, and drops exact zeros.  Pointwise
        values are unchanged.
        """
        if not self.terms:
            return self
        gamma = self.constancy_exp
        merged: dict[Fraction, complex] = {}
        for c, ball in self.terms:
            span = ball.radius_exp - gamma
            step = Fraction(self.p) ** (-ball.radius_exp)
            for w in range(self.p**span):
                rep = ball.center + PAdicScalar(self.p, w * step)
                key = rep.coset_key(gamma)
                merged[key] = merged.get(key, 0j) + c
        terms = tuple(
            (c, Ball(PAdicScalar(self.p, key), gamma))
            for key, c in sorted(merged.items())
            if c != 0
        )
        return TestFunction(self.p, terms)

    def l2_norm_sq(self) -> float:
        """``∫ |phi|**2 dx`` via the disjoint normal form."""
        canon = self.canonicalize()
        return sum(
            abs(c) ** 2 * float(self.p) ** ball.radius_exp for c, ball in canon.terms
        )


def _val_floor(x: PAdicScalar) -> int:
    """Valuation clamped to an int (zero treated as very deep)."""
    v = x.valuation
    return 10**6 if v == float("inf") else int(v)
