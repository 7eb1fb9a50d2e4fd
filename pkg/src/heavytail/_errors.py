"""Exception hierarchy shared by all modules."""


class HeavyTailError(Exception):
    """Base class for errors raised by :mod:`heavytail`."""


class InvalidParameterError(HeavyTailError, ValueError):
    """Distribution parameters outside the admissible set."""


class DomainError(HeavyTailError, ValueError):
    """Argument outside the domain of a function (probability, support, ...)."""


class ArgumentError(HeavyTailError, ValueError):
    """Bad estimator argument, typically ``k`` out of range."""


class DegenerateSampleError(HeavyTailError):
    """Sample carries no tail information (ties, too few distinct values)."""


class EstimationError(HeavyTailError):
    """A numerical estimation step produced an undefined value."""


class SingularSystemError(EstimationError):
    """Linear(ized) system with a vanishing determinant."""


class ConvergenceError(EstimationError):
    """Iterative solver or optimizer did not converge."""


class UnsupportedModelError(HeavyTailError):
    """Operation not defined for this reference model."""


__all__ = [
    "HeavyTailError",
    "InvalidParameterError",
    "DomainError",
    "ArgumentError",
    "DegenerateSampleError",
    "EstimationError",
    "SingularSystemError",
    "ConvergenceError",
    "UnsupportedModelError",
]
