"""Exact p-adic scalar arithmetic, norms, characters, and Haar shell integrals.

A p-adic number is held as an exact rational (``fractions.Fraction``), which
is dense in Q_p and closed under every operation the rest of the package
needs (addition, negation, multiplication, valuation, fractional part).
Digit expansions are derived on demand from the rational representative via
modular inverses, so arithmetic never loses precision to carries or
cancellation.

Conventions:
    * ``valuation(x)`` is the exponent of p in x, ``+inf`` for 0.
    * ``norm(x) = p ** (-valuation(x))``, ``norm(0) = 0``.
    * Haar measure is normalized so the unit ball has volume 1; the sphere
      ``|x| = p**m`` then has measure ``p**m * (1 - 1/p)``.
    * The additive character is ``chi(x) = exp(2*pi*i*{x})`` with ``{x}``
      the p-adic fractional part.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

__all__ = [
    "PAdicScalar",
    "Ball",
    "is_prime",
    "additive_character",
    "fractional_part",
    "shell_character_integral",
    "shell_character_integral_radial",
    "ball_character_integral",
    "ball_character_integral_radial",
    "sample_sphere",
    "sample_unit_ball",
]

DEFAULT_DIGITS = 32

Valuation = Union[int, float]  # int, or math.inf for the zero element


def is_prime(n: int) -> bool:
    """Trial-division primality check; parameters here are small primes."""
    if n < 2:
        return False
    if n in (2, 3):
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _int_valuation(n: int, p: int) -> int:
    """Exponent of p in a nonzero integer."""
    v = 0
    n = abs(n)
    while n % p == 0:
        n //= p
        v += 1
    return v


@dataclass(frozen=True, slots=True)
class PAdicScalar:
    """A p-adic number represented exactly by a rational value.

    The digit expansion ``x = p**v * (d0 + d1*p + d2*p**2 + ...)`` with
    ``d0 != 0`` is recovered from the rational on demand (``digits``);
    the leading exponent ``v`` is the valuation.
    """

    p: int
    value: Fraction

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))

    # ---- constructors -------------------------------------------------

    @classmethod
    def zero(cls, p: int) -> "PAdicScalar":
        return cls(p, Fraction(0))

    @classmethod
    def from_int(cls, p: int, n: int) -> "PAdicScalar":
        return cls(p, Fraction(n))

    @classmethod
    def from_rational(cls, p: int, numerator: int, denominator: int = 1) -> "PAdicScalar":
        return cls(p, Fraction(numerator, denominator))

    @classmethod
    def from_digits(cls, p: int, valuation: int, digits: Sequence[int]) -> "PAdicScalar":
        """Build ``p**valuation * sum(d_j * p**j)`` from explicit digits.

        The leading digit must be nonzero (an empty digit list gives 0).
        """
        if not digits:
            return cls.zero(p)
        if digits[0] == 0:
            raise ValueError("leading digit must be nonzero")
        unit = 0
        for j, d in enumerate(digits):
            if not 0 <= d < p:
                raise ValueError(f"digit {d} out of range for p={p}")
            unit += d * p**j
        return cls(p, Fraction(unit) * Fraction(p) ** valuation)

    # ---- structure ----------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return self.value == 0

    @property
    def valuation(self) -> Valuation:
        """Exponent of p in the value; +inf for zero."""
        if self.value == 0:
            return math.inf
        return _int_valuation(self.value.numerator, self.p) - _int_valuation(
            self.value.denominator, self.p
        )

    @property
    def norm(self) -> float:
        """The p-adic absolute value ``p**(-valuation)``; 0.0 for zero."""
        if self.value == 0:
            return 0.0
        return float(self.p) ** (-self.valuation)

    def norm_exact(self) -> Fraction:
        """Norm as an exact rational (0 for the zero element)."""
        if self.value == 0:
            return Fraction(0)
        return Fraction(self.p) ** (-self.valuation)

    def unit_part(self) -> Fraction:
        """``x / p**valuation`` — a p-adic unit (rational with p-free numerator
        and denominator)."""
        if self.value == 0:
            raise ValueError("zero has no unit part")
        return self.value / Fraction(self.p) ** self.valuation

    def digits(self, count: int = DEFAULT_DIGITS) -> tuple[int, ...]:
        """First ``count`` base-p digits of the unit part (empty for zero)."""
        if self.value == 0:
            return ()
        u = self.unit_part()
        mod = self.p**count
        residue = u.numerator * pow(u.denominator, -1, mod) % mod
        out = []
        for _ in range(count):
            residue, d = divmod(residue, self.p)
            out.append(d)
        return tuple(out)

    def fractional_part(self) -> Fraction:
        """The p-adic fractional part: the digits at negative levels.

        Returns 0 when the valuation is >= 0 (or for zero itself); otherwise
        an exact rational in [0, 1) with denominator ``p**(-valuation)``.
        """
        if self.value == 0:
            return Fraction(0)
        v = self.valuation
        if v >= 0:
            return Fraction(0)
        mod = self.p ** (-v)
        u = self.unit_part()
        residue = u.numerator * pow(u.denominator, -1, mod) % mod
        return Fraction(residue, mod)

    def coset_key(self, gamma: int) -> Fraction:
        """Canonical representative of the class of x modulo the ball
        ``{|y| <= p**gamma}``.

        Two scalars share the key iff they lie in the same coset; the key is
        the unique representative with digits only at levels below ``-gamma``.
        """
        cut = -gamma  # class is x mod p**cut * Z_p
        if self.value == 0:
            return Fraction(0)
        v = self.valuation
        if v >= cut:
            return Fraction(0)
        mod = self.p ** (cut - v)
        u = self.unit_part()
        residue = u.numerator * pow(u.denominator, -1, mod) % mod
        return Fraction(residue) * Fraction(self.p) ** v

    # ---- arithmetic ---------------------------------------------------

    def _check_same_prime(self, other: "PAdicScalar") -> None:
        if self.p != other.p:
            raise ValueError(f"mismatched primes: {self.p} != {other.p}")

    def __add__(self, other: "PAdicScalar") -> "PAdicScalar":
        self._check_same_prime(other)
        return PAdicScalar(self.p, self.value + other.value)

    def __sub__(self, other: "PAdicScalar") -> "PAdicScalar":
        self._check_same_prime(other)
        return PAdicScalar(self.p, self.value - other.value)

    def __neg__(self) -> "PAdicScalar":
        return PAdicScalar(self.p, -self.value)

    def __mul__(self, other: "PAdicScalar") -> "PAdicScalar":
        self._check_same_prime(other)
        return PAdicScalar(self.p, self.value * other.value)

    def __repr__(self) -> str:
        return f"PAdicScalar(p={self.p}, {self.value})"


def fractional_part(x: PAdicScalar) -> Fraction:
    """Module-level alias for :meth:`PAdicScalar.fractional_part`."""
    return x.fractional_part()


def additive_character(x: PAdicScalar) -> complex:
    """The standard additive character ``exp(2*pi*i*{x})`` as a complex unit."""
    frac = x.fractional_part()
    if frac == 0:
        return complex(1.0, 0.0)
    return cmath.exp(2j * math.pi * float(frac))


@dataclass(frozen=True, slots=True)
class Ball:
    """The ball ``{x : |x - center| <= p**radius_exp}``.

    Ultrametricity makes any two balls nested or disjoint; every point of a
    ball is a center for it.
    """

    center: PAdicScalar
    radius_exp: int

    @property
    def p(self) -> int:
        return self.center.p

    def volume(self) -> float:
        return float(self.p) ** self.radius_exp

    def contains(self, x: PAdicScalar) -> bool:
        return (x - self.center).valuation >= -self.radius_exp

    def contains_zero(self) -> bool:
        return self.center.valuation >= -self.radius_exp

    def same_ball(self, other: "Ball") -> bool:
        return self.radius_exp == other.radius_exp and self.contains(other.center)

    def __repr__(self) -> str:
        return f"Ball(center={self.center.value}, radius_exp={self.radius_exp}, p={self.p})"


# ---- Haar-measure character integrals ---------------------------------


def shell_character_integral_radial(m: int, valuation: Valuation, p: int) -> float:
    """``∫_{|xi| = p**m} chi(-x*xi) d(xi)`` for ``|x| = p**(-valuation)``.

    Radial in x; the three cases are full sphere measure, the boundary
    shell, and zero:

        p**m * (1 - 1/p)   if valuation >= m      (|x| <= p**-m)
        -p**(m-1)          if valuation == m - 1  (|x| == p**(-m+1))
        0                  otherwise
    """
    if valuation >= m:
        return float(p) ** m * (1.0 - 1.0 / p)
    if valuation == m - 1:
        return -float(p) ** (m - 1)
    return 0.0


def shell_character_integral(m: int, x: PAdicScalar) -> float:
    """``∫_{|xi| = p**m} chi(-x*xi) d(xi)``, exact by the radial case split."""
    return shell_character_integral_radial(m, x.valuation, x.p)


def ball_character_integral_radial(m: int, valuation: Valuation, p: int) -> float:
    """``∫_{|xi| <= p**m} chi(-x*xi) d(xi) = p**m`` if ``|x| <= p**(-m)`` else 0."""
    if valuation >= m:
        return float(p) ** m
    return 0.0


def ball_character_integral(m: int, x: PAdicScalar) -> float:
    return ball_character_integral_radial(m, x.valuation, x.p)


# ---- Haar sampling ------------------------------------------------------


def sample_sphere(p: int, n: int, rng, ndigits: int = DEFAULT_DIGITS) -> PAdicScalar:
    """Uniform (Haar) sample from the sphere ``{|x| = p**(-n)}``.

    The leading digit is uniform on {1, ..., p-1}, the next ``ndigits - 1``
    digits uniform on {0, ..., p-1}; the result is the exact rational with
    that terminating expansion.  Resolution below level ``n + ndigits`` is
    discarded, which no in-scope computation can observe.
    """
    d0 = int(rng.integers(1, p))
    unit = d0
    power = p
    for d in rng.integers(0, p, size=ndigits - 1):
        unit += int(d) * power
        power *= p
    return PAdicScalar(p, Fraction(unit) * Fraction(p) ** n)


def sample_unit_ball(p: int, rng, ndigits: int = DEFAULT_DIGITS) -> PAdicScalar:
    """Uniform sample from the unit ball at ``ndigits`` resolution."""
    unit = 0
    power = 1
    for d in rng.integers(0, p, size=ndigits):
        unit += int(d) * power
        power *= p
    return PAdicScalar(p, Fraction(unit))
