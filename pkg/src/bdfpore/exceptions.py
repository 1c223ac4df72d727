"""Exception types raised by bdfpore."""

import numpy as np


class UnsupportedOrderError(ValueError):
    """Requested BDF step number outside 1..6."""


class InsufficientHistoryError(ValueError):
    """A history window is shorter than the operation needs."""


class SingularMatrixError(np.linalg.LinAlgError):
    """Matrix is singular to working precision."""


class RootFindingError(RuntimeError):
    """Simultaneous root iteration failed to converge.

    The ``residuals`` attribute holds ``|p(z_k)|`` at the last iterate.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class DegeneracyError(ValueError):
    """Two polynomials share a common divisor."""


class DivergenceError(RuntimeError):
    """Time integration produced non-finite or exploding values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ConfigError(ValueError):
    """Malformed experiment configuration."""
