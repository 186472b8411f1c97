"""Multi-asset basket option pricing via multidimensional Mellin inversion.

Assets follow exponential Levy dynamics; European values come from one
inverse Mellin transform of the payoff transform times the characteristic
function, and American values add an early-exercise premium driven by a
critical-price curve.  Hot kernels run on numba by default with a
pure-numpy fallback (``MELLINPRICER_BACKEND=numpy``).
"""

from ._kernels import backend_name
from .errors import (
    AccuracyWarning,
    BoundaryConvergenceError,
    ConfigError,
    DomainError,
    InfiniteIntegralError,
    NonDecayingIntegrandError,
    NotPositiveDefiniteError,
    PricerError,
    StripViolationError,
    UnsupportedDimensionError,
    UnsupportedStyleError,
)
from .levy_models import (
    CharacteristicModel,
    KouJumps,
    LevyTriplet,
    MertonJumps,
    NoJumps,
    calibrate_drift,
    levy_ito_sample,
    sample_increments,
)
from .mellin import (
    ContourSpec,
    MellinFunction,
    choose_truncation,
    inverse_mellin,
    inverse_mellin_many,
    log_gamma,
    log_multinomial_beta,
    multinomial_beta,
    plan_contour,
)
from .oracles import (
    McConfig,
    binomial_american_put,
    black_scholes_call,
    black_scholes_put,
    mc_american_lsq,
    mc_european,
)
from .payoffs import (
    OptionSpec,
    PayoffDef,
    basket_put_payoff,
    basket_put_transform,
    call_from_parity,
    exercise_source_transform,
    log_basket_put_transform,
    register_payoff,
)
from .pricing import (
    BoundaryCurve,
    Diagnostics,
    PricingResult,
    pide_residual,
    price,
    price_american,
    price_european,
    solve_boundary,
    suggest_contour,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyWarning",
    "BoundaryConvergenceError",
    "BoundaryCurve",
    "CharacteristicModel",
    "ConfigError",
    "ContourSpec",
    "Diagnostics",
    "DomainError",
    "InfiniteIntegralError",
    "KouJumps",
    "LevyTriplet",
    "McConfig",
    "MellinFunction",
    "MertonJumps",
    "NoJumps",
    "NonDecayingIntegrandError",
    "NotPositiveDefiniteError",
    "OptionSpec",
    "PayoffDef",
    "PricerError",
    "PricingResult",
    "StripViolationError",
    "UnsupportedDimensionError",
    "UnsupportedStyleError",
    "backend_name",
    "basket_put_payoff",
    "basket_put_transform",
    "binomial_american_put",
    "black_scholes_call",
    "black_scholes_put",
    "calibrate_drift",
    "call_from_parity",
    "choose_truncation",
    "exercise_source_transform",
    "inverse_mellin",
    "inverse_mellin_many",
    "levy_ito_sample",
    "log_basket_put_transform",
    "log_gamma",
    "log_multinomial_beta",
    "mc_american_lsq",
    "mc_european",
    "multinomial_beta",
    "pide_residual",
    "plan_contour",
    "price",
    "price_american",
    "price_european",
    "register_payoff",
    "sample_increments",
    "solve_boundary",
    "suggest_contour",
]
