"""Exception and warning types shared across the package."""


class ConfigError(ValueError):
    """A scenario or module configuration is invalid."""


class InsufficientSamplesError(ValueError):
    """A buffer is too short for the requested processing."""


class IqFileError(ValueError):
    """An IQ recording or its sidecar header cannot be parsed."""


class DegenerateStatisticError(ArithmeticError):
    """The mean autocovariance is zero, so the ratio statistic is undefined."""


class AnalyticDomainError(ArithmeticError):
    """A closed-form expression is evaluated outside its domain."""


class UnreachableTargetError(RuntimeError):
    """A detection-probability target is not met anywhere on the scanned grid."""


class CalibrationWarning(UserWarning):
    """Too few expected exceedances for a stable empirical quantile."""
