"""Independent ground-truth pricers used by the test suite and the CLI.

Closed-form Black-Scholes (n=1 European), CRR binomial (n=1 American),
and Monte Carlo (any n): terminal-payoff estimation for European options
and Longstaff-Schwartz regression for American ones.  The samplers are
exact in distribution for the shipped finite-activity models, so Monte
Carlo estimates carry statistical error only.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
import warnings

import numpy as np
from scipy.special import ndtr

from . import _kernels as kernels
from .payoffs import PAYOFFS

_BATCH = 1 << 16


def norm_cdf(x):
    """Standard normal CDF (erf-based, ~1e-16 accurate)."""
    return ndtr(x)


def black_scholes_put(spot, strike, rate, sigma, maturity):
    """Closed-form European put under geometric Brownian motion."""
    spot = np.asarray(spot, dtype=float)
    if maturity <= 0.0:
        return np.maximum(strike - spot, 0.0)[()]
    vt = sigma * math.sqrt(maturity)
    d1 = (np.log(spot / strike) + (rate + 0.5 * sigma * sigma) * maturity) / vt
    d2 = d1 - vt
    out = strike * math.exp(-rate * maturity) * ndtr(-d2) - spot * ndtr(-d1)
    return out[()]


def black_scholes_call(spot, strike, rate, sigma, maturity):
    """Closed-form European call (internal parity cross-check)."""
    put = black_scholes_put(spot, strike, rate, sigma, maturity)
    return put + np.asarray(spot, dtype=float) - strike * math.exp(-rate * maturity)


def binomial_european_put(spot, strike, rate, sigma, maturity, steps):
    """CRR lattice without early exercise (for lattice-internal checks)."""
    dt = maturity / steps
    u = math.exp(sigma * math.sqrt(dt))
    d = 1.0 / u
    disc = math.exp(-rate * dt)
    p = (math.exp(rate * dt) - d) / (u - d)
    j = np.arange(steps + 1)
    values = np.maximum(strike - spot * u ** (2.0 * j - steps), 0.0)
    for i in range(steps - 1, -1, -1):
        values = disc * (p * values[1 : i + 2] + (1.0 - p) * values[: i + 1])
    return float(values[0])


def binomial_american_put(spot, strike, rate, sigma, maturity, steps, return_boundary=False):
    """CRR lattice with exercise comparison at every node.

    With ``return_boundary=True`` also returns ``(taus, levels)``: the
    lattice-implied critical prices indexed by time to maturity (largest
    node where exercise is optimal; steps with no exercised node dropped).
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    value, raw = kernels.binomial_american_put(spot, strike, rate, sigma, maturity, steps)
    if not return_boundary:
        return value
    dt = maturity / steps
    idx = np.flatnonzero(~np.isnan(raw))
    taus = maturity - idx * dt
    order = np.argsort(taus)
    return value, (taus[order], raw[idx][order])


# --------------------------------------------------------------------------- #
# Monte Carlo
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class McConfig:
    """Monte Carlo settings.

    Reported standard error is sample-std/sqrt(paths); antithetic pairs
    count as two paths under that convention.
    """

    paths: int = 100_000
    steps: int = 1
    seed: int = 0
    antithetic: bool = False

    def __post_init__(self):
        if self.paths < 10_000:
            raise ValueError("paths must be >= 10000")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


def _terminal_log_returns(model, maturity, steps, count, rng, antithetic):
    """Total log returns L(T), shape (count, n); exact per-interval sampling."""
    trip = model.triplet
    n = trip.n
    dt = maturity / steps
    if antithetic:
        half = (count + 1) // 2
        z = rng.standard_normal((half, steps, n))
        z = np.concatenate([z, -z], axis=0)[:count]
        gauss_paths = half
    else:
        z = rng.standard_normal((count, steps, n))
        gauss_paths = count
    total = (z @ (trip.chol.T * math.sqrt(dt))).sum(axis=1) + trip.sampling_drift * maturity
    for k, jump in enumerate(trip.jumps):
        lam = jump.intensity
        if lam == 0.0:
            continue
        counts = rng.poisson(lam * dt, size=(gauss_paths, steps))
        sums = jump.sample_sums(rng, counts).sum(axis=1)
        if antithetic:
            sums = np.concatenate([sums, sums])[:count]
        total[:, k] += sums
    return total


def mc_european(spec, model, mc, payoff_fn=None, threads=1):
    """Discounted terminal-payoff estimate, returns (price, std_error).

    Paths are partitioned into fixed-size batches with independently
    spawned generator streams and reduced in batch order, so results are
    bit-reproducible for a given seed at any thread count.
    """
    if payoff_fn is None:
        direct = PAYOFFS[spec.kind].direct
        payoff_fn = lambda s_t: direct(s_t, spec.strike)
    maturity = spec.maturity
    disc = math.exp(-spec.rate * maturity)
    spot = spec.spot_vec
    counts = [min(_BATCH, mc.paths - i) for i in range(0, mc.paths, _BATCH)]
    seeds = np.random.SeedSequence(mc.seed).spawn(len(counts))

    def run_batch(args):
        count, seed = args
        rng = np.random.default_rng(seed)
        log_ret = _terminal_log_returns(model, maturity, mc.steps, count, rng, mc.antithetic)
        s_t = spot * np.exp(spec.rate * maturity + log_ret)
        pay = np.asarray(payoff_fn(s_t), dtype=float)
        return pay.sum(), np.square(pay).sum(), pay.size

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_batch, zip(counts, seeds)))
    else:
        results = [run_batch(args) for args in zip(counts, seeds)]

    total = sum(r[0] for r in results)
    total_sq = sum(r[1] for r in results)
    m = sum(r[2] for r in results)
    mean = total / m
    var = max(total_sq / m - mean * mean, 0.0) * m / (m - 1)
    return disc * mean, disc * math.sqrt(var / m)


def _lsq_continuation(x, target, strike):
    """Regress discounted continuation values on the polynomial basis.

    The nominal basis is {1, x, x^2, payoff} in the aggregate; restricted
    to in-the-money paths the payoff column equals K - x and is collinear
    with {1, x}, so it is excluded there by construction (the fitted
    projection is identical).  Remaining rank deficiency reduces the basis
    further with a warning.
    """
    xs = x / strike
    columns = [np.ones_like(xs), xs, xs * xs]
    for drop_to in (3, 2):
        design = np.column_stack(columns[:drop_to])
        coef, _, rank, _ = np.linalg.lstsq(design, target, rcond=None)
        if rank == design.shape[1]:
            if drop_to < 3:
                warnings.warn(f"LSQ regression rank deficient; basis reduced to {drop_to} terms")
            return design @ coef
    return np.full_like(xs, target.mean())


def mc_american_lsq(spec, model, mc, exercise_dates=32):
    """Longstaff-Schwartz estimate for the American basket put.

    Polynomial basis in the aggregate sum(S_j) (matching the aggregate
    exercise closure of the pricer), low-biased by construction; returns
    (price, std_error).
    """
    if exercise_dates < 1:
        raise ValueError("exercise_dates must be >= 1")
    strike, maturity = spec.strike, spec.maturity
    dt = maturity / exercise_dates
    step_disc = math.exp(-spec.rate * dt)
    rng = np.random.default_rng(mc.seed)
    spot = spec.spot_vec

    if mc.antithetic:
        half = (mc.paths + 1) // 2
        z = rng.standard_normal((half, exercise_dates, spec.n))
        z = np.concatenate([z, -z], axis=0)[: mc.paths]
        jump_paths = half
    else:
        z = rng.standard_normal((mc.paths, exercise_dates, spec.n))
        jump_paths = mc.paths
    trip = model.triplet
    increments = z @ (trip.chol.T * math.sqrt(dt)) + trip.sampling_drift * dt
    for k, jump in enumerate(trip.jumps):
        lam = jump.intensity
        if lam == 0.0:
            continue
        counts = rng.poisson(lam * dt, size=(jump_paths, exercise_dates))
        sums = jump.sample_sums(rng, counts)
        if mc.antithetic:
            sums = np.concatenate([sums, sums], axis=0)[: mc.paths]
        increments[:, :, k] += sums

    log_ret = np.cumsum(increments, axis=1)
    times = dt * np.arange(1, exercise_dates + 1)
    # Aggregate price per path and date; only the aggregate enters basis+payoff.
    aggregate = np.einsum(
        "ptn->pt", spot * np.exp(spec.rate * times[None, :, None] + log_ret)
    )

    cashflow = np.maximum(strike - aggregate[:, -1], 0.0)
    for t in range(exercise_dates - 2, -1, -1):
        cashflow *= step_disc
        intrinsic = np.maximum(strike - aggregate[:, t], 0.0)
        itm = intrinsic > 0.0
        if np.count_nonzero(itm) > 8:
            cont = _lsq_continuation(aggregate[itm, t], cashflow[itm], strike)
            exercise = intrinsic[itm] >= cont
            idx = np.flatnonzero(itm)[exercise]
            cashflow[idx] = intrinsic[idx]
    cashflow *= step_disc
    mean = float(cashflow.mean())
    se = float(cashflow.std(ddof=1) / math.sqrt(mc.paths))
    intrinsic_now = max(strike - float(spot.sum()), 0.0)
    return max(mean, intrinsic_now), se
