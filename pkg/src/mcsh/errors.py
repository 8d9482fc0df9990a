"""Exception types shared across the package.

Everything derives from McshError so callers can catch library failures
with a single except clause; the CLI maps these to exit code 1 and
reserves exit code 2 for bad usage/configuration.
"""


class McshError(Exception):
    """Base class for all library errors."""


class ConfigurationError(McshError):
    """Invalid or inconsistent user-supplied configuration."""


class GridMismatchError(McshError):
    """Operands live on different grids."""


class BasisError(McshError):
    """Field is in the wrong basis (physical vs frequency) for an operation."""


class ResolutionError(McshError):
    """Data is not resolved on the requested grid (band-edge mass too large)."""


class NonConvergenceError(McshError):
    """An iterative solve failed to reach its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ConstraintError(McshError):
    """Constructed data violates a constraint that cannot be repaired."""


class PreconditionError(McshError):
    """Input state does not satisfy a documented precondition."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BlowUpError(McshError):
    """Evolution produced non-finite values."""

    def __init__(self, message, step=None, time=None):
        super().__init__(message)
        self.step = step
        self.time = time


class DivergenceError(McshError):
    """A requested integral diverges for the given exponents."""
