"""Exception hierarchy shared by all flaglp modules."""


class FlagLPError(Exception):
    """Base class for all library errors."""


class ConfigurationError(FlagLPError):
    """Invalid construction parameters (dimensions, radii, exponents...)."""


class ResolutionError(FlagLPError):
    """A requested scale is finer than the grid can represent."""


class ShapeMismatchError(FlagLPError):
    """Two objects live on incompatible grids or index sets."""


class DomainError(FlagLPError):
    """A numeric argument is outside its mathematical domain."""


class RangeError(FlagLPError):
    """A scale index is outside the range covered by a filter bank."""


class DivergenceError(FlagLPError):
    """An iterative scheme cannot contract (probe ratio >= 1)."""


class ConvergenceError(FlagLPError):
    """An iterative scheme hit its iteration cap before the tolerance."""


class KernelError(FlagLPError):
    """A kernel evaluator failed away from its declared singular support."""


class IntegrationError(FlagLPError):
    """Adaptive quadrature did not converge."""


class TruncationError(FlagLPError):
    """A truncation radius is below the grid spacing."""
