"""Exception types shared across the package."""


class InvlearnError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatchError(InvlearnError, ValueError):
    """An input vector or matrix has a shape incompatible with the operator."""


class ConfigurationError(InvlearnError, ValueError):
    """A spec, parameter set, or experiment config is internally inconsistent."""


class ConvergenceError(InvlearnError, RuntimeError):
    """An iterative solver failed to reach its target residual.

    Carries the last residual so callers can decide whether best-effort
    output is usable.
    """

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ContractivityError(InvlearnError, RuntimeError):
    """A fixed-point map violated its certified contraction factor."""
