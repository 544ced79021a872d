"""Skeleton simulation of the ultrametric jump process and Monte Carlo
first-return estimation.

Increments over a time step dt are drawn exactly from the heat kernel at
time dt (radius by inverse CDF over shell masses, direction uniform), so the
skeleton's marginals at grid times are exact by the semigroup property.

Two engines coexist:

* a scalar engine over exact :class:`~padicdiff.padic.PAdicScalar` states
  (:func:`simulate_path`), convenient for inspection and small studies;
* vectorized batch engines keyed by counter-based Philox streams, one stream
  per fixed-size chunk of paths, so results are reproducible bit-for-bit for
  a given (seed, n_paths, chunk_size) regardless of worker count.

The first-return sampler exploits that, reduced modulo the unit ball, the
skeleton is a random walk on Z/p**(-r): while the walk sits at 0 the holding
time is geometric, so waiting steps are skipped by sampling the geometric
directly; excursions outside 0 are then stepped exactly.  The sampled law is
identical to stepping every increment.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import chi2 as _chi2

from .heat import heat_kernel, transition_probability
from .operator import ModelParams
from .padic import Ball, PAdicScalar, sample_sphere, sample_unit_ball

__all__ = [
    "PathRecord",
    "FirstReturn",
    "EmpiricalDistribution",
    "increment_radius_mass",
    "fractional_class_distribution",
    "sample_increment",
    "simulate_path",
    "first_return_time",
    "monte_carlo_first_return",
    "sample_skeleton_marginal",
    "marginal_chi_square",
]

VALUATION_SENTINEL = 10**9  # deeper than any resolvable valuation

RETURNED = "returned"
NO_RETURN = "no_return"  # exited the unit ball, no re-entry before the horizon
NEVER_EXITED = "never_exited"


# ---- increment law -----------------------------------------------------------


def increment_radius_mass(n: int, dt: float, params: ModelParams) -> float:
    """Probability that a dt-increment lands on the shell ``|w| = p**(-n)``."""
    measure = float(params.p) ** (-n) * (1.0 - 1.0 / params.p)
    return heat_kernel(n, dt, params) * measure


def _chunk_rng(seed: int, index: int) -> np.random.Generator:
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def fractional_class_distribution(params: ModelParams, dt: float) -> np.ndarray:
    """Law of a dt-increment reduced modulo the unit ball.

    Classes are integers c in [0, p**(-r)); class c corresponds to fractional
    digits ``p**r * c``.  Class 0 collects every increment of norm <= 1;
    class c != 0 comes from the shell at valuation ``r + v_p(c)``, uniformly.
    """
    params.require_alpha_positive()
    params.require_negative_r()
    if dt <= 0:
        raise ValueError("dt must be positive")
    p, r = params.p, params.r
    n_classes = p ** (-r)
    probs = np.zeros(n_classes)
    outside_mass = 0.0
    for n in range(r, 0):
        mass = increment_radius_mass(n, dt, params)
        outside_mass += mass
        count = p ** (-n) - p ** (-n - 1)  # classes with v_p(c) == n - r
        per_class = mass / count
        for c in range(n_classes):
            if c == 0:
                continue
            j = _int_vp(c, p)
            if r + j == n:
                probs[c] = per_class
    probs[0] = 1.0 - outside_mass
    return probs


def _int_vp(c: int, p: int) -> int:
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v


# ---- scalar engine --------------------------------------------------------------


def sample_increment(
    dt: float, params: ModelParams, rng: np.random.Generator, ndigits: int = 32
) -> PAdicScalar:
    """One exact increment: radius by lazily extended inverse CDF over the
    shell masses, direction uniform on the sphere."""
    params.require_alpha_positive()
    if dt <= 0:
        raise ValueError("dt must be positive")
    u = float(rng.random())
    cum = 0.0
    n = params.r
    while True:
        mass = increment_radius_mass(n, dt, params)
        cum += mass
        if u < cum:
            break
        # masses decay geometrically; once they underflow the remaining
        # probability is below float resolution and the deepest shell wins
        if mass == 0.0 and n > params.r + 64:
            break
        n += 1
    return sample_sphere(params.p, n, rng, ndigits)


@dataclass(frozen=True)
class PathRecord:
    """A simulated skeleton: states at grid times ``k * dt``."""

    params: ModelParams
    dt: float
    states: tuple[PAdicScalar, ...]
    seed: int

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.states))

    def norms(self) -> list[float]:
        return [x.norm for x in self.states]


def simulate_path(
    params: ModelParams,
    dt: float,
    horizon: float,
    x0: PAdicScalar | None,
    seed: int,
    ndigits: int = 32,
) -> PathRecord:
    """Simulate the skeleton from x0 (uniform on the unit ball when None)."""
    params.require_alpha_positive()
    if dt <= 0:
        raise ValueError("dt must be positive")
    if horizon < dt:
        raise ValueError("horizon must be at least one step")
    rng = _chunk_rng(seed, 0)
    if x0 is None:
        x0 = sample_unit_ball(params.p, rng, ndigits)
    elif x0.p != params.p:
        raise ValueError("x0 prime differs from model prime")
    steps = int(math.floor(horizon / dt + 1e-9))
    states = [x0]
    x = x0
    for _ in range(steps):
        x = x + sample_increment(dt, params, rng, ndigits)
        states.append(x)
    return PathRecord(params, dt, tuple(states), seed)


class FirstReturn(NamedTuple):
    status: str  # RETURNED, NO_RETURN, or NEVER_EXITED
    time: float | None


def first_return_time(path: PathRecord) -> FirstReturn:
    """First grid time back inside the unit ball after a grid-visible exit.

    The path must start inside the unit ball.  Distinguishes paths that
    never exited from paths that exited but did not re-enter in time.
    """
    norms = path.norms()
    if norms[0] > 1.0:
        raise ValueError("path must start inside the unit ball")
    exit_idx = None
    for k, nrm in enumerate(norms):
        if exit_idx is None:
            if nrm > 1.0:
                exit_idx = k
        elif nrm <= 1.0:
            return FirstReturn(RETURNED, k * path.dt)
    if exit_idx is None:
        return FirstReturn(NEVER_EXITED, None)
    return FirstReturn(NO_RETURN, None)


# ---- Monte Carlo first return ------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalDistribution:
    """First-return samples plus censoring bookkeeping for one MC run."""

    params: ModelParams
    dt: float
    horizon: float
    n_paths: int
    seed: int
    chunk_size: int
    return_times: np.ndarray  # sorted, in (0, horizon]
    n_never_exited: int
    n_no_return: int

    def __post_init__(self):
        object.__setattr__(
            self, "return_times", np.ascontiguousarray(self.return_times, dtype=float)
        )
        if len(self.return_times) + self.n_never_exited + self.n_no_return != self.n_paths:
            raise ValueError("sample and censor counts must account for every path")

    @property
    def n_returned(self) -> int:
        return len(self.return_times)

    @property
    def censored_fraction(self) -> float:
        return (self.n_never_exited + self.n_no_return) / self.n_paths

    @property
    def mean_return_time(self) -> float:
        """Mean over uncensored samples (censoring is negligible whenever the
        horizon covers many mean excursions)."""
        return float(self.return_times.mean())

    def cdf(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        counts = np.searchsorted(self.return_times, t, side="right")
        return counts / self.n_paths

    def ks_distance(self, cdf_callable) -> float:
        """One-sample Kolmogorov distance against an analytic CDF."""
        n = self.n_paths
        xs = self.return_times
        analytic = np.asarray([cdf_callable(x) for x in xs], dtype=float)
        upper = np.arange(1, len(xs) + 1) / n
        lower = np.arange(0, len(xs)) / n
        return float(np.max(np.maximum(np.abs(upper - analytic), np.abs(lower - analytic))))


def _first_return_chunk(
    params: ModelParams,
    dt: float,
    steps: int,
    chunk_len: int,
    seed: int,
    chunk_index: int,
    probs: np.ndarray,
) -> tuple[np.ndarray, int, int]:
    """First-return times for one chunk of paths (NaN where censored).

    Phase one: geometric holding time at class 0 (the walk leaves the unit
    ball on the step of the first nonzero fractional increment).  Phase two:
    step the fractional walk until it hits 0 again or the horizon ends.
    """
    rng = _chunk_rng(seed, chunk_index)
    n_classes = len(probs)
    q_out = 1.0 - probs[0]
    cond = probs[1:] / q_out
    cum_cond = np.cumsum(cond)
    cum_cond[-1] = max(cum_cond[-1], 1.0)
    cum_full = np.cumsum(probs)
    cum_full[-1] = max(cum_full[-1], 1.0)

    exit_step = rng.geometric(q_out, size=chunk_len).astype(np.int64)
    entry = 1 + np.searchsorted(cum_cond, rng.random(chunk_len)).astype(np.int64)

    tau = np.full(chunk_len, np.nan)
    never_exited = int(np.count_nonzero(exit_step > steps))

    alive = exit_step <= steps
    idx = np.nonzero(alive)[0]
    y = entry[idx]
    step = exit_step[idx]
    while idx.size:
        can_step = step < steps
        idx, y, step = idx[can_step], y[can_step], step[can_step]
        if not idx.size:
            break
        draws = np.searchsorted(cum_full, rng.random(idx.size))
        y = (y + draws) % n_classes
        step = step + 1
        back = y == 0
        tau[idx[back]] = step[back] * dt
        keep = ~back
        idx, y, step = idx[keep], y[keep], step[keep]
    n_no_return = chunk_len - never_exited - int(np.count_nonzero(~np.isnan(tau)))
    return tau, never_exited, n_no_return


def monte_carlo_first_return(
    params: ModelParams,
    dt: float,
    horizon: float,
    n_paths: int,
    seed: int,
    threads: int = 1,
    chunk_size: int = 4096,
) -> EmpiricalDistribution:
    """Estimate the first-return law over n_paths independent skeletons.

    Paths start uniform on the unit ball (which fixes the fractional class
    to 0, so the start draw is implicit).  Chunks own independent Philox
    streams keyed by (seed, chunk index); the result is identical for any
    thread count given the same (seed, n_paths, chunk_size).
    """
    params.require_alpha_positive()
    params.require_negative_r()
    if dt <= 0:
        raise ValueError("dt must be positive")
    if horizon < dt:
        raise ValueError("horizon must be at least one step")
    if n_paths <= 0:
        raise ValueError("n_paths must be positive")
    steps = int(math.floor(horizon / dt + 1e-9))
    probs = fractional_class_distribution(params, dt)
    jobs = []
    start = 0
    ci = 0
    while start < n_paths:
        chunk_len = min(chunk_size, n_paths - start)
        jobs.append((params, dt, steps, chunk_len, seed, ci, probs))
        start += chunk_len
        ci += 1
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_first_return_chunk_star, jobs))
    else:
        results = [_first_return_chunk(*job) for job in jobs]
    taus = np.concatenate([r[0] for r in results])
    never = sum(r[1] for r in results)
    no_ret = sum(r[2] for r in results)
    times = np.sort(taus[~np.isnan(taus)])
    return EmpiricalDistribution(
        params=params,
        dt=dt,
        horizon=horizon,
        n_paths=n_paths,
        seed=seed,
        chunk_size=chunk_size,
        return_times=times,
        n_never_exited=never,
        n_no_return=no_ret,
    )


def _first_return_chunk_star(job):
    return _first_return_chunk(*job)


# ---- batch marginals ----------------------------------------------------------------


def _max_digits(p: int) -> int:
    w = 1
    while p ** (w + 1) <= 2**62:
        w += 1
    return w


def _vp_array(m: np.ndarray, p: int, cap: int) -> np.ndarray:
    v = np.zeros(m.shape, dtype=np.int64)
    work = m.copy()
    for _ in range(cap):
        d = (work > 0) & (work % p == 0)
        if not d.any():
            break
        work[d] //= p
        v[d] += 1
    return v


def sample_skeleton_marginal(
    params: ModelParams,
    dt: float,
    steps: int,
    n_paths: int,
    seed: int,
    chunk_size: int = 1 << 17,
    start_at_zero: bool = True,
) -> np.ndarray:
    """Valuations of ``X(steps * dt)`` over n_paths skeleton paths.

    Full per-step simulation tracking states modulo ``p**W`` (W chosen so the
    modulus fits 63-bit arithmetic); valuations beyond that window report the
    sentinel, as do exact zeros.  Start is the origin or uniform on the unit
    ball.
    """
    params.require_alpha_positive()
    if dt <= 0 or steps <= 0 or n_paths <= 0:
        raise ValueError("dt, steps, and n_paths must be positive")
    p, r = params.p, params.r
    w_digits = _max_digits(p)
    modulus = p**w_digits
    # shell lookup table, extended until the tail is below float resolution
    masses = []
    n = r
    while True:
        masses.append(increment_radius_mass(n, dt, params))
        if sum(masses) >= 1.0 - 1e-15 and len(masses) > 4:
            break
        n += 1
        if n > r + 512:
            break
    cum = np.cumsum(masses)
    cum[-1] = max(cum[-1], 1.0)
    out = np.empty(n_paths, dtype=np.int64)
    start = 0
    ci = 0
    while start < n_paths:
        chunk_len = min(chunk_size, n_paths - start)
        rng = _chunk_rng(seed, ci)
        state = np.zeros(chunk_len, dtype=np.int64)
        if not start_at_zero:
            # uniform on the unit ball: valuation >= 0, i.e. multiples of p**(-r)
            top = modulus // p ** (-r)
            state = p ** (-r) * rng.integers(0, top, size=chunk_len, dtype=np.int64)
        for _ in range(steps):
            u = rng.random(chunk_len)
            shell = np.searchsorted(cum, u)  # valuation n = r + shell
            d0 = rng.integers(1, p, size=chunk_len, dtype=np.int64) if p > 2 else np.ones(
                chunk_len, dtype=np.int64
            )
            hi = rng.integers(0, p ** (w_digits - 1), size=chunk_len, dtype=np.int64)
            extra = np.clip(w_digits - shell - 1, 0, w_digits - 1)
            unit = d0 + p * (hi % np.power(p, extra))
            shift = np.power(p, np.clip(shell, 0, w_digits - 1))
            w = np.where(shell <= w_digits - 1, unit * shift, 0)
            state = (state + w) % modulus
        v = _vp_array(state, p, w_digits)
        vals = np.where(state > 0, r + v, VALUATION_SENTINEL)
        out[start : start + chunk_len] = vals
        start += chunk_len
        ci += 1
    return out


def marginal_chi_square(
    params: ModelParams,
    dt: float,
    steps: int,
    n_paths: int,
    seed: int,
    min_expected: float = 20.0,
    start_at_zero: bool = True,
    chunk_size: int = 1 << 17,
) -> dict:
    """Chi-square comparison of simulated skeleton marginals against the
    analytic transition law at ``t = steps * dt`` (started at the origin).

    Bins are valuation shells from r upward while the expected count stays
    above ``min_expected``, plus one tail bin; returns the statistic, the
    degrees of freedom, and the p-value.
    """
    t = steps * dt
    p, r = params.p, params.r
    vals = sample_skeleton_marginal(
        params, dt, steps, n_paths, seed, start_at_zero=start_at_zero, chunk_size=chunk_size
    )
    shell_probs = []
    n = r
    while True:
        mass = increment_radius_mass(n, t, params)
        if mass * n_paths < min_expected and n > r:
            break
        shell_probs.append(mass)
        n += 1
        if n > r + 128:
            break
    n_max = r + len(shell_probs) - 1
    origin = PAdicScalar.zero(p)
    tail_prob = transition_probability(t, origin, Ball(origin, -(n_max + 1)), params)
    expected = np.array(shell_probs + [tail_prob]) * n_paths
    observed = np.zeros(len(expected))
    for i, n in enumerate(range(r, n_max + 1)):
        observed[i] = np.count_nonzero(vals == n)
    observed[-1] = np.count_nonzero(vals > n_max)
    stat = float(((observed - expected) ** 2 / expected).sum())
    dof = len(expected) - 1
    pvalue = float(_chi2.sf(stat, dof))
    return {
        "t": t,
        "statistic": stat,
        "dof": dof,
        "pvalue": pvalue,
        "observed": observed,
        "expected": expected,
        "n_paths": n_paths,
    }
