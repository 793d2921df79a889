"""Exception types shared across the toolkit."""


class CfppError(Exception):
    """Base class for all toolkit errors."""


class ParameterError(CfppError, ValueError):
    """A converter parameter or input violates an invariant."""


class ConfigError(CfppError, ValueError):
    """A configuration file could not be parsed or validated."""


class ConvergenceError(CfppError, RuntimeError):
    """An iterative solve (fixed point or periodic steady state) failed."""


class DegenerateNetworkError(CfppError, RuntimeError):
    """The conduction state leaves the current-fed input without a path."""


class AnalyzerError(CfppError, RuntimeError):
    """The soft-switching analyzer received unusable input."""
