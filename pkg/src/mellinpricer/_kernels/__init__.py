"""Backend dispatch for the numeric hot kernels.

Two interchangeable implementations exist: a numba-jitted one (default)
and a pure-numpy fallback.  Selection happens once at import time from
the ``MELLINPRICER_BACKEND`` environment variable (``numba`` | ``numpy``).
If numba is requested (or defaulted) but unavailable, the numpy path is
used with a warning.  ``benchmarks/bench_kernels.py`` compares the two.
"""

import os
import warnings

_REQUESTED = os.environ.get("MELLINPRICER_BACKEND", "").strip().lower()

if _REQUESTED not in ("", "numba", "numpy"):
    raise ValueError(
        f"MELLINPRICER_BACKEND={_REQUESTED!r} not recognized; use 'numba' or 'numpy'"
    )

if _REQUESTED == "numpy":
    from . import numpy_backend as _backend
else:
    try:
        from . import numba_backend as _backend
    except ImportError:  # pragma: no cover - depends on environment
        if _REQUESTED == "numba":
            warnings.warn("numba backend requested but numba failed to import; using numpy")
        from . import numpy_backend as _backend


def backend_name():
    """Name of the active kernel backend ('numba' or 'numpy')."""
    return _backend.NAME


loggamma = _backend.loggamma
exp_dot = _backend.exp_dot
exp_dot2 = _backend.exp_dot2
time_folded_sum = _backend.time_folded_sum
premium_recursion_update = _backend.premium_recursion_update
binomial_american_put = _backend.binomial_american_put
