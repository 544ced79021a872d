"""Closed-form heat kernel, Cauchy solution, survival function, and
transition probabilities for the truncated-symbol diffusion.

Everything time-dependent is carried exactly as a finite sum of exponential
modes ``sum_m a_m * exp(-lambda_m * t)``; no time grids appear here.  The
heat kernel is radial with support ``|x| <= p**(-r)`` and is evaluated by a
finite shell sum (an infinite but fast-converging series at x = 0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .operator import ModelParams
from .padic import (
    Ball,
    PAdicScalar,
    ball_character_integral_radial,
    shell_character_integral_radial,
)
from .schwartz import TestFunction

__all__ = [
    "ExponentialModeSum",
    "heat_kernel",
    "heat_mass",
    "solution_modes",
    "solution_dt",
    "survival_modes",
    "transition_probability",
    "solution_as_test_function",
]

Valuation = Union[int, float]

_SERIES_RTOL = 1e-16  # relative truncation for the x = 0 series


@dataclass(frozen=True)
class ExponentialModeSum:
    """A finite sum ``sum a_m * exp(-lambda_m t)`` with distinct sorted rates."""

    modes: tuple[tuple[float, float], ...]  # (amplitude, rate), rates ascending

    @classmethod
    def from_pairs(cls, pairs) -> "ExponentialModeSum":
        acc: dict[float, float] = {}
        for a, lam in pairs:
            if lam < 0:
                raise ValueError(f"negative rate {lam}")
            acc[lam] = acc.get(lam, 0.0) + a
        return cls(tuple((a, lam) for lam, a in sorted(acc.items()) if a != 0.0))

    def value(self, t):
        """Evaluate at a scalar or array time."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for a, lam in self.modes:
            out = out + a * np.exp(-lam * t)
        return float(out) if out.ndim == 0 else out

    __call__ = value

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for a, lam in self.modes:
            out = out - a * lam * np.exp(-lam * t)
        return float(out) if out.ndim == 0 else out

    def laplace(self, s: float) -> float:
        """``∫_0^inf e^{-st} (sum) dt = sum a_m / (s + lambda_m)`` for s > 0."""
        if s <= 0:
            raise ValueError("Laplace transform requires s > 0 (pole at 0)")
        return sum(a / (s + lam) for a, lam in self.modes)

    def amplitude_at(self, rate: float) -> float:
        for a, lam in self.modes:
            if lam == rate:
                return a
        return 0.0

    def __len__(self) -> int:
        return len(self.modes)


def heat_kernel(n: Valuation, t: float, params: ModelParams) -> float:
    """Radial heat kernel value at ``|x| = p**(-n)`` and time t > 0.

    Finite shell sum for finite n; for x = 0 (``n = inf``) the boundary term
    becomes a convergent series truncated at relative size 1e-16.  Zero for
    n < r, i.e. outside ``|x| <= p**(-r)``.
    """
    params.require_alpha_positive()
    if t <= 0:
        raise ValueError(f"heat kernel requires t > 0, got t={t}")
    p, r = params.p, params.r
    if n == math.inf:
        total = float(p) ** r
        m = r + 1
        scale = 1.0 - 1.0 / p
        while True:
            term = scale * float(p) ** m * math.exp(-t * params.rate(m))
            total += term
            if term < _SERIES_RTOL * total and m > 0:
                return total
            m += 1
    n = int(n)
    if n < r:
        return 0.0
    total = float(p) ** r
    for m in range(r + 1, n + 1):
        total += (1.0 - 1.0 / p) * float(p) ** m * math.exp(-t * params.rate(m))
    total -= float(p) ** n * math.exp(-t * params.rate(n + 1))
    return total


def heat_mass(t: float, params: ModelParams) -> float:
    """Total mass ``∫ Z(x, t) dx`` computed as a numeric shell sum.

    The sum runs over shells ``|x| = p**(-n)`` for n >= r until the geometric
    tail is below resolution; the result should always be 1.
    """
    params.require_alpha_positive()
    if t <= 0:
        raise ValueError(f"heat mass requires t > 0, got t={t}")
    p, r = params.p, params.r
    center_value = heat_kernel(math.inf, t, params)
    total = 0.0
    n = r
    while True:
        shell_measure = float(p) ** (-n) * (1.0 - 1.0 / p)
        total += heat_kernel(n, t, params) * shell_measure
        n += 1
        if center_value * float(p) ** (-n) < 1e-17:
            return total


def solution_modes(n: Valuation, params: ModelParams) -> ExponentialModeSum:
    """Exponential modes of the unit-ball initial condition evolved in time,
    evaluated radially at ``|x| = p**(-n)``.

    At t = 0 the sum collapses to the unit-ball indicator; for r >= 0 the
    evolution is stationary and the single zero-rate mode is returned.
    """
    params.require_alpha_positive()
    p, r = params.p, params.r
    rm = min(r, 0)
    pairs = [(ball_character_integral_radial(rm, n, p), 0.0)]
    for m in range(r + 1, 1):  # empty when r >= 0
        amp = shell_character_integral_radial(m, n, p)
        pairs.append((amp, params.rate(m)))
    return ExponentialModeSum.from_pairs(pairs)


def solution_dt(n: Valuation, t: float, params: ModelParams) -> float:
    """Time derivative of the evolved unit-ball solution at ``|x| = p**(-n)``."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    return solution_modes(n, params).derivative(t)


def survival_modes(params: ModelParams) -> ExponentialModeSum:
    """Modes of the unit-ball occupation probability started from the
    uniform law on the unit ball.

    The evolved solution is constant on the unit ball, so this is its value
    there times unit volume.
    """
    return solution_modes(0, params)


def _ball_mass(gamma: int, t: float, params: ModelParams) -> float:
    """``∫_{|z| <= p**gamma} Z(z, t) dz`` in closed form."""
    p, r = params.p, params.r
    total = float(p) ** min(r, -gamma)
    for m in range(r + 1, -gamma + 1):  # empty when -gamma <= r
        total += (1.0 - 1.0 / p) * float(p) ** m * math.exp(-t * params.rate(m))
    return float(p) ** gamma * total


def transition_probability(
    t: float, x: PAdicScalar, ball: Ball, params: ModelParams
) -> float:
    """Probability of moving from x into the given ball in time t.

    ``t = 0`` degenerates to the indicator.  For t > 0 the shifted ball
    either contains the origin (a closed-form ball mass of the kernel) or
    sits inside a single shell where the radial kernel is constant.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    if t == 0:
        return 1.0 if ball.contains(x) else 0.0
    params.require_alpha_positive()
    shift = ball.center - x
    if shift.valuation >= -ball.radius_exp:
        return _ball_mass(ball.radius_exp, t, params)
    density = heat_kernel(shift.valuation, t, params)
    return density * float(params.p) ** ball.radius_exp


def solution_as_test_function(t: float, params: ModelParams) -> TestFunction:
    """The evolved unit-ball solution at a fixed time, as a test function.

    The solution is a combination of finitely many ball indicators; freezing
    t turns it into the exact test function ``p**r 1_{B(-r)} +
    sum_m e^{-t rate(m)} (p**m 1_{B(-m)} - p**(m-1) 1_{B(-m+1)})``.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    params.require_alpha_positive()
    p, r = params.p, params.r
    origin = PAdicScalar.zero(p)
    rm = min(r, 0)
    terms = [(complex(float(p) ** rm), Ball(origin, -rm))]
    for m in range(r + 1, 1):
        w = math.exp(-t * params.rate(m))
        terms.append((complex(w * float(p) ** m), Ball(origin, -m)))
        terms.append((complex(-w * float(p) ** (m - 1)), Ball(origin, -m + 1)))
    return TestFunction.from_terms(p, terms)
