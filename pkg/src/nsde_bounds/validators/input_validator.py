"""
Input validation for nsde-bounds.

Provides validation and normalization of numeric inputs:
- Points and vectors of a given dimension
- Square matrices
- Positive scalars, horizons and sample counts
- Axis-aligned boxes

Every validator returns the normalized value (float64 numpy arrays for
vectors and matrices) or raises ``ValidationError``.
"""

from typing import Optional, Sequence, Tuple

import numpy as np

from ..core.exceptions import NsdeBoundsError


class ValidationError(NsdeBoundsError):
    """Exception raised for validation errors."""
    pass


def validate_vector(value, dimension: Optional[int] = None, name: str = "vector") -> np.ndarray:
    """
    Validate a finite real vector.

    Args:
        value: Sequence of numbers
        dimension: Required length, if any
        name: Name used in error messages

    Returns:
        1-D float64 array

    Raises:
        ValidationError: If the value is not a finite vector of the right length
    """
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"{name} must be numeric: {e}")

    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if dimension is not None and arr.shape[0] != dimension:
        raise ValidationError(f"{name} must have length {dimension}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def validate_square_matrix(value, dimension: Optional[int] = None, name: str = "matrix") -> np.ndarray:
    """
    Validate a finite square matrix.

    Args:
        value: Nested sequence (row-major) or array
        dimension: Required size, if any
        name: Name used in error messages

    Returns:
        2-D float64 array

    Raises:
        ValidationError: If the value is not a finite square matrix
    """
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise ValidationError(f"{name} must be numeric: {e}")

    if arr.ndim == 0 and dimension in (None, 1):
        arr = arr.reshape(1, 1)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    if dimension is not None and arr.shape[0] != dimension:
        raise ValidationError(f"{name} must be {dimension}x{dimension}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def validate_positive(value, name: str = "value", allow_zero: bool = False) -> float:
    """
    Validate a finite positive scalar.

    Raises:
        ValidationError: If the value is not positive (or nonnegative with ``allow_zero``)
    """
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {value!r}")

    if not np.isfinite(number):
        raise ValidationError(f"{name} must be finite")
    if number < 0 or (number == 0 and not allow_zero):
        bound = "nonnegative" if allow_zero else "positive"
        raise ValidationError(f"{name} must be {bound}, got {number}")
    return number


def validate_count(value, minimum: int = 1, name: str = "count") -> int:
    """
    Validate an integer count with a lower bound.

    Raises:
        ValidationError: If the value is not an integer >= minimum
    """
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ValidationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValidationError(f"{name} must be at least {minimum}, got {value}")
    return int(value)


def validate_box(lo: Sequence[float], hi: Sequence[float],
                 dimension: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray]:
    """
    Validate an axis-aligned box.

    Returns:
        (lo, hi) as float64 arrays

    Raises:
        ValidationError: If the box is empty or has the wrong dimension
    """
    lo_arr = validate_vector(lo, dimension, "box.lo")
    hi_arr = validate_vector(hi, lo_arr.shape[0], "box.hi")
    if np.any(lo_arr >= hi_arr):
        raise ValidationError("box must satisfy lo < hi in every coordinate")
    return lo_arr, hi_arr


def validate_seed(value) -> int:
    """Validate an unsigned 64-bit seed."""
    seed = validate_count(value, 0, "seed")
    if seed >= 2**64:
        raise ValidationError("seed must fit in 64 bits")
    return seed
