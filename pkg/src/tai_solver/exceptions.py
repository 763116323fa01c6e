"""Exception types shared across the solver."""


class ConfigurationError(ValueError):
    """A parameter set or scenario configuration is invalid or infeasible."""


class NonConvergenceError(RuntimeError):
    """An iterative solver exhausted its budget without meeting tolerance."""

    def __init__(self, message, max_residual=None, where=None):
        super().__init__(message)
        self.max_residual = max_residual
        self.where = where


class InfeasiblePathError(RuntimeError):
    """No positive-consumption path exists for the requested boundary data."""
