"""
Core infrastructure: logging setup and the exception hierarchy.
"""

from .exceptions import (
    IntegrationError,
    NsdeBoundsError,
    NumericalError,
    SingularDiffusionError,
)

__all__ = [
    "IntegrationError",
    "NsdeBoundsError",
    "NumericalError",
    "SingularDiffusionError",
]
