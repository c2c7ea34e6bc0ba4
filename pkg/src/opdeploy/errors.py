"""Exception types raised across the package."""


class OpdeployError(Exception):
    """Base class for package errors."""


class GridMismatchError(OpdeployError, ValueError):
    """Signals combined pointwise do not share one time grid."""


class ModelError(OpdeployError):
    """An operation model violates a structural requirement."""


class ConfigurationError(OpdeployError):
    """Cost rates or settings do not cover what the model needs."""

    def __init__(self, message, product_id=None):
        super().__init__(message)
        self.product_id = product_id


class UndefinedIndexError(OpdeployError, ArithmeticError):
    """An efficiency index has a zero or negative denominator."""


class SimulationError(OpdeployError):
    """The plant cannot complete an operation with the given setting."""
