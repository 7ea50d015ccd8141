"""Exception hierarchy shared across the package."""


class RicciLabError(Exception):
    """Base class for all errors raised by riccilab."""


class UnknownGeometryError(RicciLabError, KeyError):
    """Requested catalog key does not exist."""

    def __init__(self, name, valid):
        self.name = name
        self.valid = tuple(valid)
        super().__init__(f"unknown geometry {name!r}; valid keys: {', '.join(self.valid)}")


class InvalidStateError(RicciLabError, ValueError):
    """Metric coefficients or scale factors outside the admissible range."""


class SingularTimeError(RicciLabError, ValueError):
    """Closed-form trajectory evaluated at or past its singular time."""


class StepSizeUnderflowError(RicciLabError, RuntimeError):
    """Adaptive integrator cannot satisfy the tolerance with a representable step."""


class GridError(RicciLabError, ValueError):
    """Radius or window falls outside the resolved grid, or the grid is too coarse."""


class InsufficientSamplesError(RicciLabError, ValueError):
    """Operation needs more trajectory samples than are available."""


class ConfigError(RicciLabError, ValueError):
    """Malformed scenario configuration (unknown keys, bad ranges, bad types)."""


class InvariantViolationError(RicciLabError, AssertionError):
    """A computed object failed one of its declared data invariants."""
