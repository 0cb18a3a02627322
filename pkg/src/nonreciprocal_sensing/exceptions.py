"""Exceptions raised by the sensing models and their runners."""


class SensingError(RuntimeError):
    """Base class for every error this package raises on purpose."""


class InvalidSpecError(SensingError, ValueError):
    """A model, scenario, or numerical input is malformed or out of range."""


class StabilityError(SensingError):
    """The drift has no strictly negative stability margin, so there is
    no steady state to solve for."""


class PrecisionError(SensingError):
    """The estimation precision is undefined, usually because the signal
    does not depend on the drive amplitude at all."""


class SolveError(SensingError):
    """A linear or Lyapunov solve did not meet its residual tolerance."""
