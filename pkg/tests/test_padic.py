"""Tests for exact p-adic scalars, characters, and Haar shell integrals."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from padicdiff.padic import (
    Ball,
    PAdicScalar,
    additive_character,
    ball_character_integral,
    fractional_part,
    sample_sphere,
    sample_unit_ball,
    shell_character_integral,
)

PRIMES = (2, 3, 5)


def scalar(p, num, den=1):
    return PAdicScalar.from_rational(p, num, den)


# ---- oracle: character integrals by brute-force coset sums -------------


def sphere_cosets(p, m, level):
    """Representatives of the sphere {|y| = p**m} refined into cosets of
    radius p**level (level <= m - 1 would be enough; any level < m works)."""
    k = m - level  # digits needed: d0 != 0 then k-1 free digits
    assert k >= 1
    reps = []
    for unit in range(1, p**k):
        if unit % p == 0:
            continue
        reps.append(PAdicScalar(p, Fraction(unit) * Fraction(p) ** (-m)))
    return reps, float(p) ** level


def oracle_shell_integral(m, x):
    """Numeric coset sum of chi(-x*y) over the sphere |y| = p**m, refined
    until chi is constant on each coset (coset radius <= 1/|x|)."""
    p = x.p
    level = min(m - 1, x.valuation if not x.is_zero else m - 1)
    if level == math.inf:
        level = m - 1
    reps, measure = sphere_cosets(p, m, int(level))
    total = 0.0 + 0.0j
    for rep in reps:
        total += additive_character(-(x * rep)) * measure
    assert abs(total.imag) < 1e-12
    return total.real


def oracle_ball_integral(m, x):
    p = x.p
    level = min(m - 1, x.valuation if not x.is_zero else m - 1)
    if level == math.inf:
        level = m - 1
    level = int(level)
    # all cosets of radius p**level inside the ball |y| <= p**m
    measure = float(p) ** level
    total = 0.0 + 0.0j
    for j in range(p ** (m - level)):
        rep = PAdicScalar(x.p, Fraction(j) * Fraction(p) ** (-m))
        total += additive_character(-(x * rep)) * measure
    assert abs(total.imag) < 1e-12
    return total.real


# ---- arithmetic ---------------------------------------------------------


class TestArithmetic:
    def test_one_plus_one_base_two(self):
        x = scalar(2, 1)
        s = x + x
        assert s.valuation == 1
        assert s.digits(1) == (1,)

    def test_additive_inverse(self):
        x = scalar(3, 1)
        y = scalar(3, -1)
        assert (x + y).is_zero
        assert (x + y).valuation == math.inf

    def test_half_plus_half(self):
        h = scalar(2, 1, 2)
        assert h.valuation == -1
        assert h.digits(1) == (1,)
        s = h + h
        assert s.valuation == 0
        assert s.value == 1

    def test_mismatched_primes_rejected(self):
        with pytest.raises(ValueError, match="mismatched primes"):
            scalar(2, 1) + scalar(3, 1)

    def test_norms(self):
        assert scalar(2, 8).norm == pytest.approx(1 / 8)
        assert scalar(3, 5, 9).norm == pytest.approx(9)
        assert PAdicScalar.zero(5).norm == 0.0

    def test_digits_of_rational_unit(self):
        # 1/3 is a 2-adic unit: 3 * (1 + 2 + 8 + 32 + ...) == 1 mod 2**k
        x = scalar(2, 1, 3)
        d = x.digits(6)
        value = sum(b * 2**j for j, b in enumerate(d))
        assert (3 * value) % 2**6 == 1

    def test_non_prime_rejected(self):
        with pytest.raises(ValueError, match="prime"):
            scalar(4, 1)


@settings(max_examples=200, deadline=None)
@given(
    p=st.sampled_from(PRIMES),
    a=st.fractions(min_value=-50, max_value=50, max_denominator=64),
    b=st.fractions(min_value=-50, max_value=50, max_denominator=64),
)
def test_ultrametric_inequality(p, a, b):
    x, y = PAdicScalar(p, a), PAdicScalar(p, b)
    s = x + y
    assert s.norm <= max(x.norm, y.norm) * (1 + 1e-12)
    if x.norm != y.norm:
        assert s.norm == pytest.approx(max(x.norm, y.norm))


# ---- fractional part and character --------------------------------------


class TestFractionalPart:
    def test_integer_has_zero_fraction(self):
        assert fractional_part(scalar(2, 3)) == 0

    def test_one_half(self):
        assert fractional_part(scalar(2, 1, 2)) == Fraction(1, 2)

    def test_five_ninths(self):
        # 5/9 = 3**-2 * 5 with digits (2, 1): levels -2 and -1 both below 0,
        # so the fractional part is the full value 2/9 + 1/3 = 5/9.
        x = scalar(3, 5, 9)
        assert x.digits(2) == (2, 1)
        assert fractional_part(x) == Fraction(5, 9)

    def test_negative_unit(self):
        # -1/2 = 1/2 + (-1), and -1 is a 2-adic integer
        assert fractional_part(scalar(2, -1, 2)) == Fraction(1, 2)


class TestCharacter:
    def test_at_zero(self):
        assert additive_character(PAdicScalar.zero(2)) == 1 + 0j

    def test_at_one_half(self):
        assert additive_character(scalar(2, 1, 2)) == pytest.approx(-1 + 0j)

    def test_at_one_third(self):
        got = additive_character(scalar(3, 1, 3))
        want = complex(math.cos(2 * math.pi / 3), math.sin(2 * math.pi / 3))
        assert got == pytest.approx(want)

    def test_unit_modulus(self):
        for p in PRIMES:
            for num, den in [(1, p**3), (7, p**2), (p + 1, p)]:
                assert abs(additive_character(scalar(p, num, den))) == pytest.approx(
                    1.0, abs=1e-15
                )


@settings(max_examples=200, deadline=None)
@given(
    p=st.sampled_from(PRIMES),
    a=st.fractions(min_value=-20, max_value=20, max_denominator=125),
    b=st.fractions(min_value=-20, max_value=20, max_denominator=125),
)
def test_character_additivity(p, a, b):
    x, y = PAdicScalar(p, a), PAdicScalar(p, b)
    lhs = additive_character(x + y)
    rhs = additive_character(x) * additive_character(y)
    assert lhs == pytest.approx(rhs, abs=1e-12)


# ---- shell and ball character integrals ---------------------------------


class TestShellIntegral:
    def test_at_zero_unit_sphere(self):
        assert shell_character_integral(0, PAdicScalar.zero(2)) == pytest.approx(0.5)

    def test_boundary_norm_two(self):
        x = scalar(2, 1, 2)  # |x| = 2
        got = shell_character_integral(0, x)
        assert got == pytest.approx(oracle_shell_integral(0, x), abs=1e-12)
        assert got == pytest.approx(-0.5)

    def test_outside_norm_four(self):
        x = scalar(2, 1, 4)  # |x| = 4
        got = shell_character_integral(0, x)
        assert got == pytest.approx(oracle_shell_integral(0, x), abs=1e-12)
        assert got == 0.0

    def test_full_measure_at_origin(self):
        for p in PRIMES:
            for m in (-2, 0, 3):
                got = shell_character_integral(m, PAdicScalar.zero(p))
                assert got == pytest.approx(float(p) ** m * (1 - 1 / p), abs=1e-15)

    @pytest.mark.parametrize("p", PRIMES)
    @pytest.mark.parametrize("m", [-1, 0, 1, 2])
    def test_against_coset_oracle(self, p, m):
        points = [
            PAdicScalar.zero(p),
            scalar(p, 1),
            scalar(p, p),
            scalar(p, 1, p),
            scalar(p, 1, p**2),
            scalar(p, p + 1, p**3),
        ]
        for x in points:
            # keep the oracle's coset count manageable
            if not x.is_zero and m - x.valuation > 6:
                continue
            assert shell_character_integral(m, x) == pytest.approx(
                oracle_shell_integral(m, x), abs=1e-11
            )


class TestBallIntegral:
    def test_unit_ball_at_origin(self):
        assert ball_character_integral(0, PAdicScalar.zero(2)) == pytest.approx(1.0)

    def test_vanishes_outside(self):
        x = scalar(2, 1, 2)  # |x| = 2
        got = ball_character_integral(0, x)
        assert got == pytest.approx(oracle_ball_integral(0, x), abs=1e-12)
        assert got == 0.0

    def test_half_ball(self):
        x = scalar(2, 1, 2)
        got = ball_character_integral(-1, x)
        assert got == pytest.approx(oracle_ball_integral(-1, x), abs=1e-12)
        assert got == pytest.approx(0.5)

    @pytest.mark.parametrize("p", PRIMES)
    def test_shell_sum_telescopes_to_ball(self, p):
        points = [
            PAdicScalar.zero(p),
            scalar(p, 1),
            scalar(p, 1, p),
            scalar(p, 2 * p if p > 2 else p),
            scalar(p, 1, p**3),
        ]
        for x in points:
            for m_lo, m_hi in [(-3, 2), (-1, 4), (-5, 0)]:
                total = sum(
                    shell_character_integral(m, x) for m in range(m_lo, m_hi + 1)
                )
                want = ball_character_integral(m_hi, x) - ball_character_integral(
                    m_lo - 1, x
                )
                assert total == pytest.approx(want, abs=1e-11)


# ---- sphere sampling -----------------------------------------------------


class TestSampleSphere:
    def test_norm_is_exact(self):
        rng = np.random.default_rng(1)
        for p in PRIMES:
            for n in (-2, 0, 3):
                x = sample_sphere(p, n, rng)
                assert x.valuation == n

    def test_determinism(self):
        a = np.random.default_rng(42)
        b = np.random.default_rng(42)
        xs = [sample_sphere(3, 0, a) for _ in range(20)]
        ys = [sample_sphere(3, 0, b) for _ in range(20)]
        assert xs == ys

    def test_second_digit_uniform(self):
        # chi-square over the second digit, 1e5 draws, 3-sigma-ish threshold
        p, n_draws = 2, 100_000
        rng = np.random.default_rng(2024)
        counts = np.zeros(p, dtype=int)
        for _ in range(n_draws):
            x = sample_sphere(p, 0, rng, ndigits=8)
            counts[x.digits(2)[1]] += 1
        expected = n_draws / p
        chi2 = float(((counts - expected) ** 2 / expected).sum())
        # dof = p - 1 = 1; P(chi2 > 13.9) ~ 2e-4
        assert chi2 < 13.9

    def test_unit_ball_sampler_stays_inside(self):
        rng = np.random.default_rng(3)
        for p in PRIMES:
            for _ in range(50):
                x = sample_unit_ball(p, rng)
                assert x.valuation >= 0


# ---- balls ---------------------------------------------------------------


class TestBall:
    def test_membership(self):
        omega = Ball(PAdicScalar.zero(2), 0)
        assert omega.contains(scalar(2, 1))
        assert not omega.contains(scalar(2, 1, 2))

    def test_nested_or_disjoint(self):
        p = 3
        rng = np.random.default_rng(7)
        balls = [
            Ball(sample_sphere(p, int(rng.integers(-2, 3)), rng), int(rng.integers(-2, 3)))
            for _ in range(40)
        ]
        probe_points = [sample_sphere(p, int(rng.integers(-4, 5)), rng) for _ in range(200)]
        for a in balls:
            for b in balls:
                if a.radius_exp > b.radius_exp:
                    a, b = b, a
                # either a inside b or disjoint: no probe point in both unless
                # a's center is in b
                a_in_b = b.contains(a.center)
                for x in probe_points:
                    if a.contains(x) and b.contains(x):
                        assert a_in_b
