"""Shared exception types."""


class DimensionError(ValueError):
    """Operands act on different numbers of sites, or a vector has the wrong length."""


class CapacityError(ValueError):
    """Requested realization or solve exceeds the documented size caps."""


class ParameterError(ValueError):
    """Model or config parameters violate their invariants."""


class ConvergenceError(RuntimeError):
    """An iterative solver failed to converge; carries the final residual/slope."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
