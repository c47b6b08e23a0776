"""Exception types shared across the package."""


class ParseError(ValueError):
    """A layout or scenario file is malformed."""


class ConnectivityError(ValueError):
    """A seat cannot be reached from a door."""


class ValidationError(ValueError):
    """Inputs are structurally valid but semantically unacceptable."""


class DeadlockError(RuntimeError):
    """The simulation stopped making progress.

    Carries a ``snapshot`` attribute with per-passenger positions and states
    at the moment the ceiling was hit.
    """

    def __init__(self, message, snapshot=None):
        super().__init__(message)
        self.snapshot = snapshot or {}


class CycleError(ValueError):
    """The activity precedence graph contains a cycle."""


class DivisionError(ZeroDivisionError):
    """A rate computation received a zero denominator."""
