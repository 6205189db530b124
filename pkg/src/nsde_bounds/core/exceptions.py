"""
Exception hierarchy for nsde-bounds.

Input problems raise ``ValidationError`` (see ``nsde_bounds.validators``);
everything that goes wrong while computing raises a ``NumericalError``.
The CLI maps the two families to distinct exit codes.
"""

from typing import Optional


class NsdeBoundsError(Exception):
    """Base class for all package errors."""
    pass


class NumericalError(NsdeBoundsError):
    """Raised when a computation produces unusable numbers."""
    pass


class IntegrationError(NumericalError):
    """Raised when an integrator hits a non-finite state.

    Attributes:
        time: First grid time at which the state stopped being finite
    """

    def __init__(self, message: str, time: Optional[float] = None):
        super().__init__(message)
        self.time = time


class SingularDiffusionError(NumericalError):
    """Raised when g(x) cannot be inverted at some point (ellipticity fails there)."""

    def __init__(self, message: str, point: Optional[list] = None):
        super().__init__(message)
        self.point = point
