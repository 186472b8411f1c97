"""Exception types shared across the package."""


class PricerError(Exception):
    """Base class for all numerical/domain errors raised by this package."""


class DomainError(PricerError, ValueError):
    """Evaluation requested at a pole or outside an operation's domain."""


class StripViolationError(DomainError):
    """Contour abscissa (or transform argument) outside the fundamental strip."""


class NonDecayingIntegrandError(PricerError, RuntimeError):
    """Truncation search found no decay up to the maximum half-width."""


class UnsupportedDimensionError(PricerError, ValueError):
    """More underlying assets than the tensor-product quadrature supports."""


class UnsupportedStyleError(PricerError, ValueError):
    """Exercise style not supported by the requested operation."""


class NotPositiveDefiniteError(PricerError, ValueError):
    """Covariance (or correlation) matrix fails the required definiteness."""


class InfiniteIntegralError(PricerError, ValueError):
    """Jump compensator integral diverges for the given parameters."""


class BoundaryConvergenceError(PricerError, RuntimeError):
    """Critical-price solver failed; carries the last iterate and residual."""

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class ConfigError(ValueError):
    """Run-configuration file is malformed or fails schema validation."""


class AccuracyWarning(UserWarning):
    """Quadrature diagnostics exceeded a soft accuracy threshold."""
