"""Exception hierarchy.

Scenario problems derive from :class:`SpecError` (a ``ValueError``) so callers
can catch a single type for anything that is wrong with the inputs.
"""


class SpecError(ValueError):
    """Base class for invalid scenarios and arguments."""


class OverlapError(SpecError):
    """Transmitter and receiver intersect (``distance < r_tx + r_rx``)."""


class DomainError(SpecError):
    """A quantity lies outside its physical domain."""


class KindError(SpecError):
    """Operation is not defined for the requested receiver kind."""


class DimensionError(SpecError):
    """Operation is not defined in the requested dimension."""


class ModelError(SpecError):
    """Transmitter model is not defined for the requested scenario."""


class ConvergenceError(RuntimeError):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance."""


class EmptyCurveError(RuntimeError):
    """Every point of a deviation curve was excluded."""


class GridMismatchError(ValueError):
    """Two curves that must share a time grid do not."""


class ParseError(ValueError):
    """Malformed experiment configuration file."""


class ValidationError(SpecError):
    """Configuration parsed but describes an invalid experiment.

    ``cause`` holds the underlying :class:`SpecError`, when there is one.
    """

    def __init__(self, message, cause=None):
        super().__init__(message)
        self.cause = cause
