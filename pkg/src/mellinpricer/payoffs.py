"""Payoffs in direct space and in Mellin space.

The pricer needs three things per payoff kind: a direct evaluator (terminal
conditions, Monte Carlo oracles), the forward Mellin transform in log space,
and the fundamental strip.  The registry keys them by ``kind`` so any further
Lipschitz payoff can plug in without touching the pricing engine.
"""

from dataclasses import dataclass
import math
from typing import Callable, Optional, Tuple

import numpy as np

from .errors import StripViolationError, UnsupportedStyleError
from .mellin import log_multinomial_beta

STYLES = ("european", "american")


@dataclass(frozen=True)
class OptionSpec:
    """Contract description: strike, maturity, style, payoff kind, spots, rate."""

    strike: float
    maturity: float
    style: str
    kind: str
    spot: Tuple[float, ...]
    rate: float

    def __post_init__(self):
        object.__setattr__(self, "strike", float(self.strike))
        object.__setattr__(self, "maturity", float(self.maturity))
        object.__setattr__(self, "spot", tuple(float(s) for s in np.atleast_1d(self.spot)))
        object.__setattr__(self, "rate", float(self.rate))
        if not (self.strike > 0.0 and math.isfinite(self.strike)):
            raise ValueError("strike must be positive and finite")
        if not (self.maturity > 0.0 and math.isfinite(self.maturity)):
            raise ValueError("maturity must be positive and finite")
        if any(s <= 0.0 or not math.isfinite(s) for s in self.spot):
            raise ValueError("spots must be positive and finite")
        if not (self.rate >= 0.0 and math.isfinite(self.rate)):
            raise ValueError("rate must be >= 0 and finite")
        if self.style not in STYLES:
            raise ValueError(f"style must be one of {STYLES}")
        if self.kind not in PAYOFFS:
            raise ValueError(f"unknown payoff kind {self.kind!r}; known: {sorted(PAYOFFS)}")

    @property
    def n(self):
        return len(self.spot)

    @property
    def spot_vec(self):
        return np.asarray(self.spot, dtype=float)


# --------------------------------------------------------------------------- #
# Basket put
# --------------------------------------------------------------------------- #

def basket_put_payoff(spots, strike):
    """(K - sum_j S_j)^+ ; Lipschitz with constant 1 in each coordinate."""
    spots = np.asarray(spots, dtype=float)
    total = spots.sum(axis=-1)
    return np.maximum(strike - total, 0.0)


def basket_call_payoff(spots, strike):
    """(sum_j S_j - K)^+ (direct evaluator only; priced through parity)."""
    spots = np.asarray(spots, dtype=float)
    return np.maximum(spots.sum(axis=-1) - strike, 0.0)


def _require_put_strip(w2):
    if np.any(w2.real <= 0.0):
        bad = w2[w2.real <= 0.0].ravel()[0]
        raise StripViolationError(f"basket-put transform needs Re(w_j) > 0, got w={bad}")


def log_basket_put_transform(w, strike):
    """log of the basket-put Mellin transform, rows of ``w`` on the strip.

    The transform is beta_n(w) K^{1+sum w} / ((sum w)(1 + sum w)); assembling
    in log space keeps the K^{1+sum w} factor from overflowing before the
    gamma decay sets in.
    """
    w = np.asarray(w, dtype=np.complex128)
    batch = w.ndim == 2
    w2 = w if batch else w[None, :]
    _require_put_strip(w2)
    total = w2.sum(axis=1)
    out = (
        log_multinomial_beta(w2)
        + (1.0 + total) * math.log(strike)
        - np.log(total)
        - np.log(1.0 + total)
    )
    return out if batch else complex(out[0])


def basket_put_transform(w, strike):
    """Forward Mellin transform of (K - sum S)^+ for Re(w_j) > 0."""
    out = np.exp(log_basket_put_transform(w, strike))
    return out if np.ndim(w) == 2 else complex(out)


def exercise_source_transform(w, strike, rate, s_star):
    """Mellin transform of the exercise-region source -rK 1{sum S <= s*}.

    Equals -rK beta_n(w) s*^{sum w} / (sum w) on the strip Re(w_j) > 0;
    identically zero when the rate is zero (no early-exercise premium).
    """
    if s_star <= 0.0:
        raise ValueError("critical price must be positive")
    w_arr = np.asarray(w, dtype=np.complex128)
    batch = w_arr.ndim == 2
    w2 = w_arr if batch else w_arr[None, :]
    _require_put_strip(w2)
    if rate == 0.0:
        zeros = np.zeros(w2.shape[0], dtype=np.complex128)
        return zeros if batch else complex(zeros[0])
    total = w2.sum(axis=1)
    out = -rate * strike * np.exp(
        log_multinomial_beta(w2) - np.log(total) + total * math.log(s_star)
    )
    return out if batch else complex(out[0])


def call_from_parity(put_price, spec, model=None):
    """European basket call from the put via C = P + sum S - K e^{-r tau}.

    Holds for martingale-calibrated models (each discounted asset has
    expectation equal to its spot); the model argument is accepted for
    interface symmetry.  American parity is an inequality, so that style is
    rejected.
    """
    if spec.style != "european":
        raise UnsupportedStyleError("put-call parity conversion applies to European style only")
    return float(
        put_price + spec.spot_vec.sum() - spec.strike * math.exp(-spec.rate * spec.maturity)
    )


# --------------------------------------------------------------------------- #
# Registry
# --------------------------------------------------------------------------- #

@dataclass(frozen=True)
class PayoffDef:
    """Direct evaluator, log-space Mellin transform and strip for one kind.

    ``log_transform`` is None for kinds priced through a parity relation
    rather than a direct transform.
    """

    direct: Callable[[np.ndarray, float], np.ndarray]
    log_transform: Optional[Callable[[np.ndarray, float], np.ndarray]]
    strip: Callable[[int], Tuple[Tuple[float, float], ...]]
    parity_of: Optional[str] = None


PAYOFFS = {}


def register_payoff(kind, definition):
    """Add a payoff kind; new entries need Lipschitz direct payoffs."""
    PAYOFFS[kind] = definition


register_payoff(
    "basket_put",
    PayoffDef(
        direct=basket_put_payoff,
        log_transform=log_basket_put_transform,
        strip=lambda n: ((0.0, math.inf),) * n,
    ),
)

register_payoff(
    "basket_call_via_parity",
    PayoffDef(
        direct=basket_call_payoff,
        log_transform=None,
        strip=lambda n: ((0.0, math.inf),) * n,
        parity_of="basket_put",
    ),
)
