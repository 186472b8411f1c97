"""Pure-numpy implementations of the hot kernels.

This is the fallback path selected with ``MELLINPRICER_BACKEND=numpy``.
Reductions use ``np.sum`` (pairwise), so results are deterministic for a
fixed array layout.
"""

import numpy as np
from scipy.special import loggamma as _scipy_loggamma

NAME = "numpy"


def loggamma(z):
    """Principal-branch log-gamma on complex arrays (scipy-backed)."""
    return _scipy_loggamma(np.asarray(z, dtype=np.complex128))


def exp_dot(logv, weights):
    """Sum of ``weights * exp(logv)`` as a complex scalar."""
    return complex(np.sum(weights * np.exp(logv)))


def exp_dot2(logv, factor, weights):
    """Sum of ``weights * exp(logv) * factor`` as a complex scalar."""
    return complex(np.sum(weights * np.exp(logv) * factor))


def time_folded_sum(psixr, sumw, hs, log_bs, ws):
    """Accumulate the time-quadratured premium transform on the Mellin grid.

    Returns ``sum_i ws[i] * exp(-hs[i] * psixr + log_bs[i] * sumw)``
    elementwise over the (flattened) grid arrays ``psixr``/``sumw``.
    """
    out = np.zeros(psixr.shape[0], dtype=np.complex128)
    for h, lb, w in zip(hs, log_bs, ws):
        out += w * np.exp(-h * psixr + lb * sumw)
    return out


def premium_recursion_update(acc, step_factor, sumw, log_b, weight):
    """One backward-recursion update of the running premium time sum.

    ``acc <- step_factor * (acc + weight * exp(log_b * sumw))`` elementwise.
    """
    return step_factor * (acc + weight * np.exp(log_b * sumw))


def binomial_american_put(spot, strike, rate, sigma, maturity, steps):
    """CRR lattice for the American put with backward induction.

    Returns ``(value, boundary)`` where ``boundary[k]`` is the largest
    lattice price at which exercise is optimal, for time-step index
    ``k = 0..steps-1`` (``k`` counts steps from the valuation date), and
    ``nan`` where no node exercises.
    """
    dt = maturity / steps
    u = np.exp(sigma * np.sqrt(dt))
    d = 1.0 / u
    disc = np.exp(-rate * dt)
    p = (np.exp(rate * dt) - d) / (u - d)

    j = np.arange(steps + 1)
    prices = spot * u ** (2.0 * j - steps)
    values = np.maximum(strike - prices, 0.0)

    boundary = np.full(steps, np.nan)
    for i in range(steps - 1, -1, -1):
        j = np.arange(i + 1)
        prices = spot * u ** (2.0 * j - i)
        cont = disc * (p * values[1 : i + 2] + (1.0 - p) * values[: i + 1])
        intrinsic = strike - prices
        exercise = intrinsic >= cont
        values = np.where(exercise, intrinsic, cont)
        hit = np.flatnonzero(exercise & (intrinsic > 0.0))
        if hit.size:
            boundary[i] = prices[hit[-1]]
    return float(values[0]), boundary
