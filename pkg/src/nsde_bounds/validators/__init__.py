"""
Input validation modules for nsde-bounds.

This package contains validators for:
- Vectors, square matrices and boxes
- Positive scalars, counts and seeds
"""

from .input_validator import (
    ValidationError,
    validate_box,
    validate_count,
    validate_positive,
    validate_seed,
    validate_square_matrix,
    validate_vector,
)

__all__ = [
    "ValidationError",
    "validate_box",
    "validate_count",
    "validate_positive",
    "validate_seed",
    "validate_square_matrix",
    "validate_vector",
]
