"""
Two-sided bounds on the minimum action I_T(x, y).

Upper: steer along the straight line x + (t/T)(y - x) with the
feedback-linearizing control u = g^{-1}(v - f), v = (y - x)/T.
Lower: |y - phi_T(x)|^2 / (2 lambda1 S_T(f)) for any upper bound on S_T(f).
"""

import logging
from typing import Optional, Union

import numpy as np
from scipy.integrate import simpson, trapezoid

from ..core.exceptions import SingularDiffusionError
from ..dynamics.system import ControlAffineSystem
from ..flow.integrators import default_steps, flow
from ..flow.stability import StabilityEstimate
from ..validators import ValidationError, validate_count, validate_positive, validate_vector
from .grid import ControlGrid

logger = logging.getLogger("nsde-bounds.control")


def _straight_line(x: np.ndarray, y: np.ndarray, T: float, t: np.ndarray) -> np.ndarray:
    return x[None, :] + (t / T)[:, None] * (y - x)[None, :]


def fbl_control(sys: ControlAffineSystem, x, y, T: float, K: int) -> ControlGrid:
    """Feedback-linearizing control sampled at the left endpoints of K intervals.

    Raises:
        SingularDiffusionError: If g is singular at a grid point of the line
    """
    x = validate_vector(x, sys.dimension, "x")
    y = validate_vector(y, sys.dimension, "y")
    T = validate_positive(T, "T")
    K = validate_count(K, 1, "K")
    t = np.arange(K) * (T / K)
    path = _straight_line(x, y, T, t)
    v = (y - x) / T
    gx = np.array(sys.g(path))
    cond = np.linalg.cond(gx)
    bad = ~np.isfinite(cond) | (cond > 1e12)
    if np.any(bad):
        k = int(np.argmax(bad))
        raise SingularDiffusionError(
            f"g is singular at t={t[k]:.6g} on the straight line (condition {cond[k]:.3g})",
            point=path[k].tolist(),
        )
    u = np.linalg.solve(gx, (v[None, :] - sys.f(path))[..., None])[..., 0]
    return ControlGrid(T=T, values=u)


def upper_bound_I(sys: ControlAffineSystem, x, y, T: float, quad_points: int = 201) -> float:
    """(1 / 2 lambda0) int_0^T |(y - x)/T - f(x + (t/T)(y - x))|^2 dt by composite Simpson."""
    x = validate_vector(x, sys.dimension, "x")
    y = validate_vector(y, sys.dimension, "y")
    T = validate_positive(T, "T")
    quad_points = validate_count(quad_points, 2, "quad_points")
    t = np.linspace(0.0, T, quad_points)
    integrand = np.sum(((y - x) / T - sys.f(_straight_line(x, y, T, t))) ** 2, axis=-1)
    integral = float(simpson(integrand, x=t)) if quad_points >= 3 else float(trapezoid(integrand, x=t))
    return integral / (2.0 * sys.lambda0)


def stability_value(s_t: Union[float, StabilityEstimate]) -> float:
    """The number to divide by: the certified bound of an estimate when present, else its value."""
    if isinstance(s_t, StabilityEstimate):
        if s_t.bound is not None:
            return s_t.bound
        logger.warning("Using a sampled S_T estimate in the lower bound; the result is not certified")
        return s_t.value
    return float(s_t)


def lower_bound_I(sys: ControlAffineSystem, x, y, T: float, s_t: Union[float, StabilityEstimate],
                  steps: Optional[int] = None, phi_T: Optional[np.ndarray] = None) -> float:
    """|y - phi_T(x)|^2 / (2 lambda1 S), valid when S bounds S_T(f) from above.

    Raises:
        ValidationError: If the stability value is not positive
    """
    x = validate_vector(x, sys.dimension, "x")
    y = validate_vector(y, sys.dimension, "y")
    S = stability_value(s_t)
    if not np.isfinite(S) or S <= 0:
        raise ValidationError(f"S_T value must be positive, got {S}")
    if phi_T is None:
        phi_T = flow(sys, x, T, steps or default_steps(T)).endpoint
    gap = y - phi_T
    return float(gap @ gap) / (2.0 * sys.lambda1 * S)
