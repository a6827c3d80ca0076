"""Exception types raised by the simulator."""


class DwellError(Exception):
    """Base class for all simulator errors."""


class DomainError(DwellError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedRegimeError(DwellError, ValueError):
    """The operation does not cover the requested parameter regime."""


class NoSteadyStateError(DwellError, ValueError):
    """The dynamics has no unique steady state (no damping)."""


class IntegrationError(DwellError, RuntimeError):
    """Numerical integration broke down.

    Attributes:
        time: last time reached before the failure.
    """

    def __init__(self, message, time):
        super().__init__(f"{message} (t = {time!r})")
        self.time = time


class TruncationError(IntegrationError):
    """The Fock-space cutoff is too small for the populated levels."""
