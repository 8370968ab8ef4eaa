"""Exception types shared by every module."""


class SmallBallError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(SmallBallError, ValueError):
    """A scalar parameter is outside its admissible range."""


class DimensionError(SmallBallError, ValueError):
    """Vector or matrix shapes do not agree."""


class DomainError(ParameterError):
    """The hypothesis of an inequality is violated by the inputs."""


class NotApplicableError(SmallBallError):
    """The requested bound cannot be evaluated for this input."""


class NoValidSpreadError(ParameterError):
    """The atom law admits no spread parameter b in (0, 1)."""


class CapabilityError(SmallBallError):
    """The request is outside what the implementation can certify."""


class ConvergenceError(SmallBallError, RuntimeError):
    """A numerical routine did not reach its tolerance."""


class RangeError(SmallBallError, OverflowError):
    """A result does not fit in double precision."""
