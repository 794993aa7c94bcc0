"""Exception types shared across the package.

The CLI maps these onto process exit codes, so library code should raise
the most specific one that applies rather than bare ValueError.
"""


class CurvecastError(Exception):
    """Base class for package errors."""


class ConfigError(CurvecastError):
    """Invalid configuration, arguments, or plan."""


class DataError(CurvecastError):
    """Input data violates a documented precondition."""


class NumericalError(CurvecastError):
    """A numerical procedure failed (singularity, non-convergence, instability)."""
