"""Exception types shared across the package."""


class BlendcopError(Exception):
    """Base class for all package-specific errors."""


class ParameterError(BlendcopError, ValueError):
    """A copula or weighting parameter lies outside its domain."""


class EvaluationError(BlendcopError):
    """A numerical evaluation produced a non-finite intermediate value."""


class ModelNotBuiltError(BlendcopError):
    """A blended-model operation was requested before the numerical cache exists."""


class SamplingError(BlendcopError):
    """Sampling failed (root-finder breakdown or persistent acceptance shortfall)."""


class FitError(BlendcopError):
    """Likelihood maximisation failed to produce a finite optimum."""


class UndefinedMeasureError(BlendcopError):
    """A dependence measure is undefined at the requested level (e.g. zero joint exceedances)."""


class QueryError(BlendcopError, ValueError):
    """A probability query could not be parsed or is degenerate."""


class UsageError(BlendcopError):
    """Bad command-line or configuration input."""
