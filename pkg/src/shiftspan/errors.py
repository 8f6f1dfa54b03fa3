"""Exception hierarchy shared by all shiftspan modules."""


class ShiftSpanError(Exception):
    """Base class for every error raised by shiftspan."""


class GridError(ShiftSpanError, ValueError):
    """A point, shift or window does not lie on the required grid,
    or two grids have incommensurable steps."""


class PreconditionError(ShiftSpanError, ValueError):
    """An operation was called with inputs violating its hypothesis."""


class NumericalBudgetError(ShiftSpanError, RuntimeError):
    """A numerical routine ran out of its iteration, size or accuracy budget."""


class ContourError(NumericalBudgetError):
    """A zero of the transform sits too close to an integration contour."""


class ConfigError(ShiftSpanError, ValueError):
    """Malformed input document; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
