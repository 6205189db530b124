"""
Closed-form quantities for linear SDEs dX = A X dt + G dW.

- Controllability Gramian W(T) from the Lyapunov ODE W' = AW + WA^T + GG^T
- Exact minimum action 1/2 <e, W(T)^{-1} e>, e = y - e^{TA} x
- Exact Gaussian transition density N(y; e^{TA} x, W(T))
- Minimum-energy control G^T e^{(T-t)A^T} W(T)^{-1} e

These are the reference values every other module is checked against.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, expm

from ..core.exceptions import NumericalError
from ..dynamics.families import LinearParams
from ..validators import validate_count, validate_positive, validate_vector

logger = logging.getLogger("nsde-bounds.linear")

CONDITION_LIMIT = 1e12


@dataclass(frozen=True)
class GramianResult:
    """W(T), e^{TA} and the condition number of W(T)."""
    T: float
    W: np.ndarray
    expTA: np.ndarray
    condition: float

    @property
    def ill_conditioned(self) -> bool:
        return not np.isfinite(self.condition) or self.condition > CONDITION_LIMIT

    def to_dict(self) -> dict:
        return {
            "T": self.T,
            "W": self.W.tolist(),
            "expTA": self.expTA.tolist(),
            "condition": self.condition,
            "ill_conditioned": self.ill_conditioned,
        }


def gramian(p: LinearParams, T: float, steps: Optional[int] = None) -> GramianResult:
    """Integrate the Lyapunov ODE and Phi' = A Phi together with RK4.

    Args:
        p: Linear system parameters
        T: Horizon (> 0)
        steps: RK4 steps; 1000 per unit time by default
    """
    T = validate_positive(T, "T")
    if steps is None:
        steps = max(1, int(np.ceil(1000 * T)))
    steps = validate_count(steps, 1, "steps")
    A = p.A
    Q = p.covariance_rate
    d = p.dimension
    h = T / steps

    def lyapunov(W: np.ndarray) -> np.ndarray:
        return A @ W + W @ A.T + Q

    W = np.zeros((d, d))
    Phi = np.eye(d)
    for _ in range(steps):
        k1 = lyapunov(W)
        k2 = lyapunov(W + 0.5 * h * k1)
        k3 = lyapunov(W + 0.5 * h * k2)
        k4 = lyapunov(W + h * k3)
        W = W + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        W = 0.5 * (W + W.T)

        p1 = A @ Phi
        p2 = A @ (Phi + 0.5 * h * p1)
        p3 = A @ (Phi + 0.5 * h * p2)
        p4 = A @ (Phi + h * p3)
        Phi = Phi + (h / 6.0) * (p1 + 2.0 * p2 + 2.0 * p3 + p4)

    if not (np.all(np.isfinite(W)) and np.all(np.isfinite(Phi))):
        raise NumericalError(f"Gramian integration overflowed at T={T}")

    condition = float(np.linalg.cond(W))
    result = GramianResult(T=T, W=W, expTA=Phi, condition=condition)
    if result.ill_conditioned:
        logger.warning(f"Gramian W({T}) is near-singular (condition {condition:.3g})")
    return result


def _factor(gram: GramianResult):
    try:
        return cho_factor(gram.W, lower=True)
    except np.linalg.LinAlgError as e:
        raise NumericalError(f"Gramian is not positive definite: {e}")


def _residual(p: LinearParams, x, y, gram: GramianResult) -> np.ndarray:
    x = validate_vector(x, p.dimension, "x")
    y = validate_vector(y, p.dimension, "y")
    return y - gram.expTA @ x


def exact_action_linear(p: LinearParams, x, y, T: float, steps: Optional[int] = None,
                        gram: Optional[GramianResult] = None) -> float:
    """Minimum action 1/2 <y - e^{TA}x, W(T)^{-1}(y - e^{TA}x)>."""
    gram = gram if gram is not None else gramian(p, T, steps)
    e = _residual(p, x, y, gram)
    return float(0.5 * e @ cho_solve(_factor(gram), e))


def log_density_linear(p: LinearParams, x, y, T: float, steps: Optional[int] = None,
                       gram: Optional[GramianResult] = None) -> float:
    """log N(y; e^{TA} x, W(T)) = -1/2 log((2 pi)^d det W) - action."""
    gram = gram if gram is not None else gramian(p, T, steps)
    factor = _factor(gram)
    e = _residual(p, x, y, gram)
    log_det = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))
    action = 0.5 * float(e @ cho_solve(factor, e))
    return -0.5 * (p.dimension * np.log(2.0 * np.pi) + log_det) - action


def exact_density_linear(p: LinearParams, x, y, T: float, steps: Optional[int] = None,
                         gram: Optional[GramianResult] = None) -> float:
    """Gaussian transition density p_T(x, y) with mean e^{TA}x and covariance W(T)."""
    return float(np.exp(log_density_linear(p, x, y, T, steps, gram)))


def optimal_control_linear(p: LinearParams, x, y, T: float, times: np.ndarray,
                           steps: Optional[int] = None,
                           gram: Optional[GramianResult] = None) -> np.ndarray:
    """Minimum-energy control u(t) = G^T e^{(T-t)A^T} W(T)^{-1}(y - e^{TA}x) at the given times.

    Returns:
        Array of shape (len(times), d)
    """
    gram = gram if gram is not None else gramian(p, T, steps)
    e = _residual(p, x, y, gram)
    costate = cho_solve(_factor(gram), e)
    times = np.asarray(times, dtype=float)
    return np.stack([p.G.T @ expm((T - t) * p.A.T) @ costate for t in times])
