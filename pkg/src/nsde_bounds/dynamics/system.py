"""
Control-affine systems x' = f(x) + g(x) u and their diffusions dX = f dt + g dW.

All callables act on batches: ``drift`` maps an array of shape ``(..., d)`` to
``(..., d)``; ``diffusion`` and ``jacobian`` map it to ``(..., d, d)``.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np

from ..core.exceptions import SingularDiffusionError
from ..validators import ValidationError

logger = logging.getLogger("nsde-bounds.dynamics")

ArrayFn = Callable[[np.ndarray], np.ndarray]


def fd_step(x: np.ndarray) -> np.ndarray:
    """Central-difference step h = max(1e-5, 1e-7 |x|), one per batch point."""
    norm = np.linalg.norm(x, axis=-1, keepdims=True)
    return np.maximum(1e-5, 1e-7 * norm)


def central_difference_jacobian(fn: ArrayFn, x: np.ndarray, h: Optional[float] = None) -> np.ndarray:
    """Jacobian of a batched vector field by central differences.

    Args:
        fn: Map ``(..., d) -> (..., m)``
        x: Points, shape ``(..., d)``
        h: Fixed step; defaults to ``fd_step(x)``

    Returns:
        Array of shape ``(..., m, d)``
    """
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    step = fd_step(x) if h is None else np.full(x.shape[:-1] + (1,), float(h))
    columns = []
    for i in range(d):
        e = np.zeros(d)
        e[i] = 1.0
        delta = step * e
        columns.append((fn(x + delta) - fn(x - delta)) / (2.0 * step))
    return np.stack(columns, axis=-1)


@dataclass(frozen=True)
class ControlAffineSystem:
    """A control-affine system with uniformly elliptic diffusion.

    Attributes:
        dimension: State dimension d
        drift: f, batched
        diffusion: g, batched, square d x d
        lambda0: Lower ellipticity bound of a = g g^T
        lambda1: Upper ellipticity bound of a = g g^T
        jacobian: Analytic f_*, batched; finite differences are used when absent
        constant_diffusion: g when it does not depend on x
        kind: Family tag ("linear", "rnn", "custom-expression", ...)
        params: Family parameters, kept for reporting
    """

    dimension: int
    drift: ArrayFn
    diffusion: ArrayFn
    lambda0: float
    lambda1: float
    jacobian: Optional[ArrayFn] = None
    constant_diffusion: Optional[np.ndarray] = None
    kind: str = "custom"
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValidationError(f"dimension must be positive, got {self.dimension}")
        if not (np.isfinite(self.lambda0) and np.isfinite(self.lambda1)):
            raise ValidationError("ellipticity bounds must be finite")
        if self.lambda0 <= 0:
            raise ValidationError(f"lambda0 must be positive (uniform ellipticity), got {self.lambda0}")
        if self.lambda0 > self.lambda1:
            raise ValidationError(f"lambda0 ({self.lambda0}) exceeds lambda1 ({self.lambda1})")
        if self.constant_diffusion is not None:
            self.constant_diffusion.setflags(write=False)

    @property
    def has_analytic_jacobian(self) -> bool:
        return self.jacobian is not None

    def f(self, x: np.ndarray) -> np.ndarray:
        """Drift at one point or a batch of points."""
        return self.drift(np.asarray(x, dtype=float))

    def g(self, x: np.ndarray) -> np.ndarray:
        """Diffusion matrix at one point or a batch of points."""
        x = np.asarray(x, dtype=float)
        if self.constant_diffusion is not None:
            return np.broadcast_to(self.constant_diffusion, x.shape[:-1] + self.constant_diffusion.shape)
        return self.diffusion(x)

    def a(self, x: np.ndarray) -> np.ndarray:
        """Diffusion covariance a(x) = g(x) g(x)^T."""
        gx = self.g(x)
        return gx @ np.swapaxes(gx, -1, -2)

    def jac(self, x: np.ndarray) -> np.ndarray:
        """Drift Jacobian f_*(x), analytic when available."""
        x = np.asarray(x, dtype=float)
        if self.jacobian is not None:
            return self.jacobian(x)
        return central_difference_jacobian(self.drift, x)

    def controlled_field(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Right-hand side f(x) + g(x) u of the controlled ODE."""
        x = np.asarray(x, dtype=float)
        return self.f(x) + np.einsum("...ij,...j->...i", self.g(x), u)

    def controlled_jacobians(self, x: np.ndarray, u: np.ndarray) -> tuple:
        """Partial derivatives of f(x) + g(x) u in x and in u.

        Returns:
            (d/dx, d/du), each of shape ``(..., d, d)``
        """
        x = np.asarray(x, dtype=float)
        jx = self.jac(x)
        if self.constant_diffusion is None:
            jx = jx + central_difference_jacobian(
                lambda z: np.einsum("...ij,...j->...i", self.diffusion(z), u), x
            )
        return jx, self.g(x)

    def solve_diffusion(self, x: np.ndarray, v: np.ndarray) -> np.ndarray:
        """Solve g(x) w = v for w (the feedback-linearizing control).

        Raises:
            SingularDiffusionError: If g(x) is numerically singular
        """
        gx = np.asarray(self.g(x), dtype=float)
        cond = np.linalg.cond(gx)
        if not np.isfinite(cond) or cond > 1e12:
            raise SingularDiffusionError(
                f"g(x) is singular at x={np.asarray(x).tolist()} (condition {cond:.3g})",
                point=np.asarray(x).tolist(),
            )
        return np.linalg.solve(gx, v)

    def describe(self) -> Dict[str, Any]:
        """JSON-ready summary of the system."""
        return {
            "kind": self.kind,
            "dimension": self.dimension,
            "lambda0": self.lambda0,
            "lambda1": self.lambda1,
            "analytic_jacobian": self.has_analytic_jacobian,
            "constant_diffusion": self.constant_diffusion is not None,
            "params": self.params,
        }
