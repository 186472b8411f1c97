"""Option valuation by numerical inverse Mellin transform.

European leg: with S(T) = S e^{r tau + L(tau)} and a payoff transform
theta_hat on vertical contours,

    V_E(S, tau) = e^{-r tau} M^{-1}[ theta_hat(w) e^{-r tau sum(w)}
                                     Phi_L(w i; tau) ](S),

where Phi_L is the characteristic function of L evaluated at the
componentwise product w*i.  The e^{-r tau sum(w)} factor is the rate part
of the full log return: E[S_j(tau)^{-w_j}] = S_j^{-w_j} e^{-r tau w_j}
E[e^{-w_j L_j}], and dropping it breaks the Black-Scholes reduction.  All
factors combine in log space before a single exponential per grid node.

American leg: value = European + early-exercise premium.  The premium
follows from Duhamel's principle for the backward-time problem
V_t + A V = f with f = -rK on the exercise region: integrating the
inhomogeneity forward in time-to-maturity gives

    premium(tau) = + r K  integral_0^tau  e^{-r (tau-s)}
                   M^{-1}[ beta_n(w) (S*(s))^{sum w} / sum(w)
                           e^{-r (tau-s) sum(w)} Phi_L(w i; tau-s) ](S) ds,

i.e. the minus sign of f cancels against the sign with which the source
enters the variation-of-constants formula, leaving a nonnegative premium
(the inner inverse transform is the probability that the asset aggregate
at horizon tau-s sits below the critical price S*(s)).  The s-integral is
discretized by a composite trapezoid on a uniform grid whose final
interval is subdivided geometrically (the integrand has a square-root
kink as s -> tau); the s = tau endpoint is the exact indicator
rK 1{sum S <= S*(tau)} and is added outside the quadrature.
"""

from dataclasses import dataclass, field
from functools import lru_cache
import math
from typing import Optional, Tuple

import numpy as np

from . import _kernels as kernels
from .errors import (
    BoundaryConvergenceError,
    UnsupportedDimensionError,
    UnsupportedStyleError,
)
from .mellin import (
    MAX_DIMENSION,
    ContourSpec,
    MellinFunction,
    build_folded_grid,
    plan_contour,
)
from .payoffs import PAYOFFS, OptionSpec, basket_put_payoff, call_from_parity

DEGENERATE_TAU = 1e-6
DEFAULT_TIME_STEPS = 64
_BOUNDARY_TOL = 1e-8
_BOUNDARY_MAX_ITER = 100
_EURO_TRUNC_TOL = 1e-10
_EURO_SPACING_ACC = 1e-9
_AMER_TRUNC_TOL = 1e-8
_AMER_SPACING_ACC = 1e-7
_MAX_NODES = {1: 1 << 14, 2: 1536, 3: 384}


@dataclass(frozen=True)
class BoundaryCurve:
    """Critical aggregate price S*(s) on a time-to-maturity grid.

    ``times`` ascend from 0 (where S* = K for the no-dividend put).
    """

    times: Tuple[float, ...]
    levels: Tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.levels) or len(self.times) < 1:
            raise ValueError("times and levels must have equal nonzero length")

    def level_at(self, s):
        return np.interp(s, self.times, self.levels)


@dataclass
class Diagnostics:
    """Quadrature and solver metadata attached to a pricing result."""

    nodes: Tuple[int, ...] = ()
    half_widths: Tuple[float, ...] = ()
    imag_residue: float = 0.0
    time_steps: Optional[int] = None
    boundary_iterations: Optional[int] = None
    boundary_curve: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None
    note: Optional[str] = None

    def to_dict(self):
        out = {
            "nodes": list(self.nodes),
            "half_widths": list(self.half_widths),
            "imag_residue": self.imag_residue,
        }
        if self.time_steps is not None:
            out["time_steps"] = self.time_steps
        if self.boundary_iterations is not None:
            out["boundary_iterations"] = self.boundary_iterations
        if self.boundary_curve is not None:
            out["boundary_curve"] = {
                "times": list(self.boundary_curve[0]),
                "levels": list(self.boundary_curve[1]),
            }
        if self.note is not None:
            out["note"] = self.note
        return out


@dataclass
class PricingResult:
    """Price with its additive decomposition and diagnostics."""

    price: float
    european_part: float
    premium_part: float
    diagnostics: Diagnostics = field(default_factory=Diagnostics)

    def to_dict(self):
        return {
            "price": self.price,
            "european_part": self.european_part,
            "premium_part": self.premium_part,
            "diagnostics": self.diagnostics.to_dict(),
        }


# --------------------------------------------------------------------------- #
# Contour selection
# --------------------------------------------------------------------------- #

def _pricing_strip(spec, model):
    payoff_strip = PAYOFFS["basket_put"].strip(spec.n)
    uppers = model.strip_upper()
    return tuple((lo, min(hi, up)) for (lo, hi), up in zip(payoff_strip, uppers))


def _default_abscissa(spec, model):
    strip = _pricing_strip(spec, model)
    return tuple(min(2.0, 0.5 * hi) if math.isfinite(hi) else 2.0 for _, hi in strip)


def _pricing_transform(spec, model, horizon):
    """Magnitude proxy of the full pricing integrand at time scale ``horizon``."""
    log_transform = PAYOFFS["basket_put"].log_transform
    rate = spec.rate
    strike = spec.strike

    def evaluator(w):
        sumw = w.sum(axis=1)
        psi = model.char_exponent(1j * w)
        return np.exp(log_transform(w, strike) - horizon * (psi + rate * (sumw + 1.0)))

    return MellinFunction(evaluator=evaluator, strip=_pricing_strip(spec, model))


def suggest_contour(spec, model, *, time_steps=None, trunc_tol=None, spacing_acc=None):
    """Automatic ContourSpec for the pricing integrand of ``spec``.

    For American pricing pass ``time_steps``: the premium quadrature then
    contains factors at horizon tau/time_steps, which sets the slowest
    decay and hence the truncation.  Node spacing resolves the x^-w phase
    at the spot's log-moneyness (plus headroom for boundary evaluations at
    aggregate points).
    """
    if spec.n > MAX_DIMENSION:
        raise UnsupportedDimensionError(
            f"pricing supports n <= {MAX_DIMENSION}, got n={spec.n}"
        )
    horizon = spec.maturity if time_steps is None else spec.maturity / time_steps
    if trunc_tol is None:
        trunc_tol = _EURO_TRUNC_TOL if time_steps is None else _AMER_TRUNC_TOL
    if spacing_acc is None:
        spacing_acc = _EURO_SPACING_ACC if time_steps is None else _AMER_SPACING_ACC
    abscissa = _default_abscissa(spec, model)
    osc = [
        abs(math.log(s / spec.strike)) + math.log(spec.n) + 1.5 for s in spec.spot
    ]
    contour = plan_contour(
        _pricing_transform(spec, model, horizon),
        abscissa,
        tol=trunc_tol,
        accuracy=spacing_acc,
        osc_scales=osc,
        max_nodes=_MAX_NODES[spec.n],
    )
    if spec.n == 1:
        return contour
    # A shared node spacing lets boundary iterations collapse the grid onto
    # the sum(w) lattice; harmonize dimensions to the finest spacing.
    db = min(2.0 * b / (m - 1) for b, m in zip(contour.half_width, contour.nodes))
    nodes = []
    for b in contour.half_width:
        m = int(np.ceil(2.0 * b / db)) + 1
        m += m % 2
        nodes.append(max(16, min(m, _MAX_NODES[spec.n])))
    return ContourSpec(contour.abscissa, contour.half_width, tuple(nodes))


# --------------------------------------------------------------------------- #
# Pricing engine (grid precomputation shared across spots and time steps)
# --------------------------------------------------------------------------- #

class _Engine:
    """Folded-grid precomputation for one (model, strike, rate, contour)."""

    def __init__(self, model, strike, rate, contour):
        self.model = model
        self.strike = strike
        self.rate = rate
        self.contour = contour
        self.n = contour.n
        self.norm = (2.0 * math.pi) ** (-self.n)
        w, qw = build_folded_grid(contour)
        self.w = w
        self.qw = qw
        self.sumw = w.sum(axis=1)
        log_beta = kernels.loggamma(w).sum(axis=1) - kernels.loggamma(self.sumw)
        self.log_theta = (
            log_beta
            + (1.0 + self.sumw) * math.log(strike)
            - np.log(self.sumw)
            - np.log(1.0 + self.sumw)
        )
        # Premium source magnitude beta_n / sum(w); the rK factor and the
        # Duhamel sign resolution live in premium_value.
        self.log_source = log_beta - np.log(self.sumw)
        self.source = np.exp(self.log_source)
        psi = model.char_exponent(1j * w)
        # Exponent of the discounted full log-return factor:
        # e^{-h psixr} = e^{-r h} e^{-r h sum(w)} Phi_L(w i; h).
        self.psixr = psi + rate * (self.sumw + 1.0)

    def _wlnx(self, spot):
        return self.w @ np.log(np.asarray(spot, dtype=float))

    def european_value(self, tau, spot):
        logv = self.log_theta - tau * self.psixr - self._wlnx(spot)
        return self.norm * kernels.exp_dot(logv, self.qw).real

    def premium_value(self, tau, spot, curve, time_steps):
        """Early-exercise premium at ``spot`` given the solved boundary."""
        rate, strike = self.rate, self.strike
        if rate == 0.0:
            return 0.0
        s_nodes, weights = _premium_partition(tau, time_steps)
        levels = curve.level_at(s_nodes)
        time_sum = kernels.time_folded_sum(
            self.psixr,
            self.sumw,
            tau - s_nodes[:-1],
            np.log(levels[:-1]),
            weights[:-1],
        )
        logv = self.log_source - self._wlnx(spot)
        premium = rate * strike * self.norm * kernels.exp_dot2(logv, time_sum, self.qw).real
        # s = tau endpoint: the transform no longer decays (Phi = 1), but its
        # inverse is the exercise indicator, added exactly.
        premium += weights[-1] * rate * strike * _indicator(
            float(np.sum(spot)), float(levels[-1]), strike
        )
        return premium

    def residue_estimate(self, tau, spot):
        """Imaginary residue of the European integrand on a coarse full grid."""
        coarse = ContourSpec(
            self.contour.abscissa,
            self.contour.half_width,
            tuple(min(m, 32) for m in self.contour.nodes),
        )
        w, qw = _unfolded_grid(coarse)
        sumw = w.sum(axis=1)
        log_beta = kernels.loggamma(w).sum(axis=1) - kernels.loggamma(sumw)
        log_theta = (
            log_beta
            + (1.0 + sumw) * math.log(self.strike)
            - np.log(sumw)
            - np.log(1.0 + sumw)
        )
        psixr = self.model.char_exponent(1j * w) + self.rate * (sumw + 1.0)
        logv = log_theta - tau * psixr - w @ np.log(np.asarray(spot, dtype=float))
        return abs(kernels.exp_dot(logv, qw).imag) * self.norm


def _unfolded_grid(contour):
    parts = []
    for j in range(contour.n):
        b = np.linspace(-contour.half_width[j], contour.half_width[j], contour.nodes[j])
        db = b[1] - b[0]
        wt = np.full(b.size, db)
        wt[0] = wt[-1] = 0.5 * db
        parts.append((contour.abscissa[j] + 1j * b, wt))
    grids = np.meshgrid(*[p[0] for p in parts], indexing="ij")
    wts = np.meshgrid(*[p[1] for p in parts], indexing="ij")
    w = np.stack([g.ravel() for g in grids], axis=1)
    qw = np.ones(w.shape[0])
    for wt in wts:
        qw *= wt.ravel().real
    return w, qw


def _indicator(total_spot, level, strike):
    tol = 1e-12 * strike
    if total_spot < level - tol:
        return 1.0
    if total_spot <= level + tol:
        return 0.5
    return 0.0


def _premium_partition(tau, time_steps):
    """Time nodes and trapezoid weights on [0, tau] for the premium integral.

    Uniform grid of ``time_steps`` intervals with the last interval
    subdivided four times, geometrically refined toward s = tau where the
    boundary's square-root behavior lives.
    """
    delta = tau / time_steps
    nodes = [delta * j for j in range(time_steps)]
    nodes += [tau - delta / 2.0, tau - delta / 4.0, tau - delta / 8.0, tau]
    nodes = np.asarray(nodes)
    gaps = np.diff(nodes)
    weights = np.empty(nodes.size)
    weights[0] = 0.5 * gaps[0]
    weights[-1] = 0.5 * gaps[-1]
    weights[1:-1] = 0.5 * (gaps[:-1] + gaps[1:])
    return nodes, weights


@lru_cache(maxsize=64)
def _engine_cached(model, strike, rate, contour):
    return _Engine(model, strike, rate, contour)


# --------------------------------------------------------------------------- #
# Boundary solver
# --------------------------------------------------------------------------- #

def _collapse_keys(sumw):
    quantized = np.round(sumw.imag * 1e6).astype(np.int64)
    uniq, inverse = np.unique(quantized, return_inverse=True)
    kappa = sumw.real[0] + 1j * (uniq / 1e6)
    return kappa, inverse


def _collapse(inverse, size, values):
    return np.bincount(inverse, weights=values.real, minlength=size) + 1j * np.bincount(
        inverse, weights=values.imag, minlength=size
    )


def _solve_boundary_impl(engine, maturity, time_steps):
    """Backward recursion for the critical aggregate price.

    At each time-to-maturity grid point the value-matching fixed point
    s -> K - V((s/n) * ones; tau_k) is iterated, with the boundary known on
    earlier grid points and the current candidate entering only through the
    analytic endpoint indicator.  Escaping iterates fall back to bisection
    on the premium-over-intrinsic margin.
    """
    strike, rate, n = engine.strike, engine.rate, engine.n
    delta = maturity / time_steps
    step_factor = np.exp(-delta * engine.psixr)
    kappa, inverse = _collapse_keys(engine.sumw)
    acc = np.zeros(engine.w.shape[0], dtype=np.complex128)
    times = [0.0]
    levels = [strike]
    endpoint_const = 0.5 * delta * rate * strike * 0.5  # trapezoid end-weight x half-indicator
    ln_agg = math.log(n)
    max_iters = 0

    for k in range(1, time_steps + 1):
        tau_k = k * delta
        weight = 0.5 * delta if k == 1 else delta
        acc = kernels.premium_recursion_update(
            acc, step_factor, engine.sumw, math.log(levels[-1]), weight
        )
        coeffs = engine.qw * (
            np.exp(engine.log_theta - tau_k * engine.psixr)
            + rate * strike * engine.source * acc
        )
        collapsed = _collapse(inverse, kappa.size, coeffs)

        def value_at(s):
            phases = np.exp(-kappa * (math.log(s) - ln_agg))
            return engine.norm * float(np.sum(collapsed * phases).real) + endpoint_const

        level, iters = _fixed_point(value_at, levels[-1], strike)
        max_iters = max(max_iters, iters)
        times.append(tau_k)
        levels.append(level)
    return BoundaryCurve(tuple(times), tuple(levels)), max_iters


def _fixed_point(value_at, start, strike):
    s = min(max(start, 1e-9 * strike), strike)
    for it in range(1, _BOUNDARY_MAX_ITER + 1):
        s_new = strike - value_at(s)
        if not (0.0 < s_new <= strike):
            return _bisect_boundary(value_at, strike), it
        if abs(s_new - s) < _BOUNDARY_TOL * strike:
            return s_new, it
        s = s_new
    return s, _BOUNDARY_MAX_ITER


def _bisect_boundary(value_at, strike):
    """Largest s with premium-over-intrinsic s + V(s) - K below tolerance."""
    margin = 1e-7 * strike

    def gap(s):
        return s + value_at(s) - strike

    lo, hi = 1e-6 * strike, strike
    if gap(hi) <= margin:
        return hi
    if gap(lo) > margin:
        raise BoundaryConvergenceError(
            "bisection bracket failed for the exercise boundary",
            last_iterate=lo,
            residual=gap(lo),
        )
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if gap(mid) <= margin:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-10 * strike:
            break
    return lo


@lru_cache(maxsize=32)
def _boundary_cached(model, strike, rate, maturity, time_steps, contour):
    engine = _engine_cached(model, strike, rate, contour)
    return _solve_boundary_impl(engine, maturity, time_steps)


# --------------------------------------------------------------------------- #
# Public operations
# --------------------------------------------------------------------------- #

def _validate_pair(spec, model):
    if spec.n != model.n:
        raise ValueError(f"option dimension {spec.n} != model dimension {model.n}")
    if spec.n > MAX_DIMENSION:
        raise UnsupportedDimensionError(
            f"pricing supports n <= {MAX_DIMENSION}, got n={spec.n}"
        )


def _degenerate_result(spec):
    direct = PAYOFFS[spec.kind].direct
    value = float(direct(spec.spot_vec, spec.strike))
    diag = Diagnostics(note="degenerate maturity: value is the terminal payoff")
    return PricingResult(price=value, european_part=value, premium_part=0.0, diagnostics=diag)


def _put_spec(spec):
    if spec.kind == "basket_put":
        return spec
    parity_of = PAYOFFS[spec.kind].parity_of
    return OptionSpec(
        strike=spec.strike,
        maturity=spec.maturity,
        style="european",
        kind=parity_of,
        spot=spec.spot,
        rate=spec.rate,
    )


def price_european(spec, model, contour=None):
    """European value as the discounted inverse transform of theta_hat * Phi.

    Maturities at or below 1e-6 years short-circuit to the terminal payoff
    (the quadrature contour would need half-widths beyond the truncation
    ladder there, and the time value is below every stated tolerance).
    Call kinds are produced from the put through parity.
    """
    _validate_pair(spec, model)
    tau = spec.maturity
    if tau <= DEGENERATE_TAU:
        return _degenerate_result(spec)
    if PAYOFFS[spec.kind].log_transform is None:
        put_result = price_european(_put_spec(spec), model, contour)
        call_value = call_from_parity(put_result.price, spec, model)
        put_result.price = call_value
        put_result.european_part = call_value
        put_result.diagnostics.note = "call valued through put-call parity"
        return put_result
    if contour is None:
        contour = suggest_contour(spec, model)
    engine = _engine_cached(model, spec.strike, spec.rate, contour)
    value = engine.european_value(tau, spec.spot_vec)
    diag = Diagnostics(
        nodes=contour.nodes,
        half_widths=contour.half_width,
        imag_residue=engine.residue_estimate(tau, spec.spot_vec),
    )
    return PricingResult(price=value, european_part=value, premium_part=0.0, diagnostics=diag)


def solve_boundary(spec, model, contour=None, time_steps=DEFAULT_TIME_STEPS):
    """Critical-price curve for the American basket put (r > 0)."""
    _validate_pair(spec, model)
    if spec.style != "american":
        raise UnsupportedStyleError("boundary solving applies to American style")
    if spec.rate <= 0.0:
        raise ValueError("the r = 0 American put has no exercise boundary below K")
    if time_steps < 16:
        raise ValueError("time_steps must be >= 16")
    if contour is None:
        contour = suggest_contour(spec, model, time_steps=time_steps)
    curve, _ = _boundary_cached(
        model, spec.strike, spec.rate, spec.maturity, time_steps, contour
    )
    return curve


def price_american(spec, model, contour=None, time_steps=DEFAULT_TIME_STEPS):
    """American value as European plus the early-exercise premium.

    The premium quadrature and boundary recursion share one contour sized
    for the smallest horizon tau/time_steps.  American calls on
    non-dividend-paying assets are never exercised early, so that kind is
    routed to the European call (premium exactly zero).
    """
    _validate_pair(spec, model)
    if spec.style != "american":
        raise UnsupportedStyleError("price_american requires style='american'")
    tau = spec.maturity
    if tau <= DEGENERATE_TAU:
        return _degenerate_result(spec)
    if PAYOFFS[spec.kind].log_transform is None:
        euro_spec = OptionSpec(
            strike=spec.strike,
            maturity=spec.maturity,
            style="european",
            kind=spec.kind,
            spot=spec.spot,
            rate=spec.rate,
        )
        result = price_european(euro_spec, model, contour)
        result.diagnostics.note = (
            "American call on non-dividend assets equals the European call"
        )
        return result
    if spec.rate == 0.0:
        result = price_european(
            OptionSpec(
                strike=spec.strike,
                maturity=spec.maturity,
                style="european",
                kind=spec.kind,
                spot=spec.spot,
                rate=spec.rate,
            ),
            model,
            contour,
        )
        result.diagnostics.note = "r = 0: American put premium is zero"
        return result
    if time_steps < 16:
        raise ValueError("time_steps must be >= 16")
    if contour is None:
        contour = suggest_contour(spec, model, time_steps=time_steps)
    engine = _engine_cached(model, spec.strike, spec.rate, contour)
    curve, iters = _boundary_cached(
        model, spec.strike, spec.rate, spec.maturity, time_steps, contour
    )
    european = engine.european_value(tau, spec.spot_vec)
    premium = engine.premium_value(tau, spec.spot_vec, curve, time_steps)
    diag = Diagnostics(
        nodes=contour.nodes,
        half_widths=contour.half_width,
        imag_residue=engine.residue_estimate(tau, spec.spot_vec),
        time_steps=time_steps,
        boundary_iterations=iters,
        boundary_curve=(curve.times, curve.levels),
    )
    return PricingResult(
        price=european + premium,
        european_part=european,
        premium_part=premium,
        diagnostics=diag,
    )


def price(spec, model, contour=None, time_steps=DEFAULT_TIME_STEPS):
    """Style dispatcher used by the CLI."""
    if spec.style == "american":
        return price_american(spec, model, contour, time_steps)
    return price_european(spec, model, contour)


# --------------------------------------------------------------------------- #
# Backward-PIDE residual diagnostic
# --------------------------------------------------------------------------- #

def _uniform_spacing(grid, name):
    grid = np.asarray(grid, dtype=float)
    if grid.size < 3:
        raise ValueError(f"{name} grid needs at least 3 points")
    gaps = np.diff(grid)
    if np.any(gaps <= 0) or not np.allclose(gaps, gaps[0], rtol=1e-9):
        raise ValueError(f"{name} grid must be uniformly increasing")
    return float(gaps[0])


def _shifted_values(values, grid, axis, factor):
    """Linear interpolation of V along ``axis`` at grid*factor (linear
    extrapolation from the edge pairs outside the grid)."""
    h = grid[1] - grid[0]
    pos = (grid * factor - grid[0]) / h
    idx = np.clip(np.floor(pos).astype(int), 0, grid.size - 2)
    frac = pos - idx
    lead = np.take(values, idx, axis=axis)
    trail = np.take(values, idx + 1, axis=axis)
    shape = [1] * values.ndim
    shape[axis] = grid.size
    frac = frac.reshape(shape)
    return lead * (1.0 - frac) + trail * frac


def _jump_quadrature(jump):
    """Nodes and density-weighted trapezoid weights for one jump family."""
    from .levy_models import KouJumps, MertonJumps, NoJumps

    if isinstance(jump, NoJumps) or jump.intensity == 0.0:
        return None
    if isinstance(jump, MertonJumps):
        y = np.linspace(jump.mean - 8.0 * jump.std, jump.mean + 8.0 * jump.std, 201)
        dens = np.exp(-0.5 * ((y - jump.mean) / jump.std) ** 2) / (
            jump.std * math.sqrt(2.0 * math.pi)
        )
        wt = np.full(y.size, y[1] - y[0])
        wt[0] = wt[-1] = 0.5 * (y[1] - y[0])
        return y, jump.intensity * dens * wt
    if isinstance(jump, KouJumps):
        y_up = np.linspace(0.0, 12.0 / jump.up_rate, 241)
        d_up = jump.up_prob * jump.up_rate * np.exp(-jump.up_rate * y_up)
        w_up = np.full(y_up.size, y_up[1] - y_up[0])
        w_up[0] = w_up[-1] = 0.5 * (y_up[1] - y_up[0])
        y_dn = np.linspace(-12.0 / jump.down_rate, 0.0, 241)
        d_dn = (1.0 - jump.up_prob) * jump.down_rate * np.exp(jump.down_rate * y_dn)
        w_dn = np.full(y_dn.size, y_dn[1] - y_dn[0])
        w_dn[0] = w_dn[-1] = 0.5 * (y_dn[1] - y_dn[0])
        y = np.concatenate([y_dn, y_up])
        wt = np.concatenate([d_dn * w_dn, d_up * w_up])
        return y, jump.intensity * wt
    raise TypeError(f"unknown jump family {type(jump).__name__}")


def pide_residual(spec, model, s_grids, t_grid, values):
    """Pointwise residual of the backward pricing PIDE on a sampled grid.

    Finite differences (second order in the price directions, central in
    time) of the diffusion/drift/discount terms plus the jump integral,
    evaluated by quadrature over the finite-activity jump densities with
    linear interpolation of V at the jumped prices.  Returns the residual
    on the interior points, shape (len(t)-2, *(len(S_j)-2)).  A correct
    European price surface drives it to zero at order h^2.
    """
    n = model.n
    if n > 2:
        raise UnsupportedDimensionError("pide_residual supports n <= 2")
    s_grids = [np.asarray(g, dtype=float) for g in s_grids]
    if len(s_grids) != n:
        raise ValueError("one price grid per asset is required")
    values = np.asarray(values, dtype=float)
    dt = _uniform_spacing(t_grid, "time")
    spacings = []
    for j, grid in enumerate(s_grids):
        h = _uniform_spacing(grid, f"S[{j}]")
        if h > grid.min() / 10.0:
            raise ValueError(
                f"S[{j}] grid too coarse: spacing {h:g} exceeds min(S)/10 = {grid.min() / 10.0:g}"
            )
        spacings.append(h)
    expected = (len(t_grid),) + tuple(g.size for g in s_grids)
    if values.shape != expected:
        raise ValueError(f"values shape {values.shape} != {expected}")

    trip = model.triplet
    rate = spec.rate
    sigma = trip.vol_vec
    corr = trip.corr_mat

    # Spatial operator on the full S-grid, per time slice.
    def spatial(v):
        out = -rate * v
        grads = []
        for j in range(n):
            ax = j
            h = spacings[j]
            grad = np.gradient(v, h, axis=ax, edge_order=2)
            grads.append(grad)
            s_shape = [1] * n
            s_shape[j] = s_grids[j].size
            s_j = s_grids[j].reshape(s_shape)
            second = (np.roll(v, -1, axis=ax) - 2.0 * v + np.roll(v, 1, axis=ax)) / (h * h)
            out = out + 0.5 * sigma[j] ** 2 * s_j ** 2 * second + rate * s_j * grad
        if n == 2:
            h0, h1 = spacings
            cross = (
                np.roll(np.roll(v, -1, 0), -1, 1)
                + np.roll(np.roll(v, 1, 0), 1, 1)
                - np.roll(np.roll(v, -1, 0), 1, 1)
                - np.roll(np.roll(v, 1, 0), -1, 1)
            ) / (4.0 * h0 * h1)
            s0 = s_grids[0][:, None]
            s1 = s_grids[1][None, :]
            out = out + corr[0, 1] * sigma[0] * sigma[1] * s0 * s1 * cross
        for j, jump in enumerate(trip.jumps):
            quad = _jump_quadrature(jump)
            if quad is None:
                continue
            y_nodes, wts = quad
            s_shape = [1] * n
            s_shape[j] = s_grids[j].size
            s_j = s_grids[j].reshape(s_shape)
            integral = np.zeros_like(v)
            for y, wt in zip(y_nodes, wts):
                shifted = _shifted_values(v, s_grids[j], j, math.exp(y))
                integral += wt * (shifted - v - (math.exp(y) - 1.0) * s_j * grads[j])
            out = out + integral
        return out

    residual = np.empty((len(t_grid) - 2,) + tuple(g.size - 2 for g in s_grids))
    interior = tuple(slice(1, -1) for _ in range(n))
    for k in range(1, len(t_grid) - 1):
        v_t = (values[k + 1] - values[k - 1]) / (2.0 * dt)
        residual[k - 1] = (v_t + spatial(values[k]))[interior]
    return residual
