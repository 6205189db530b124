"""
Piecewise-constant controls, RK4 rollouts of x' = f(x) + g(x) u and the
discrete adjoint of those rollouts.

The adjoint differentiates the RK4 recursion itself (not the continuous ODE),
so gradients agree with finite differences of the transcribed objective up
to roundoff.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..core.exceptions import IntegrationError
from ..dynamics.system import ControlAffineSystem
from ..flow.integrators import Trajectory
from ..validators import ValidationError, validate_count, validate_positive, validate_vector

logger = logging.getLogger("nsde-bounds.control")


@dataclass(frozen=True)
class ControlGrid:
    """Control values u_k held constant on [t_k, t_{k+1}), t_k = k T / K."""

    T: float
    values: np.ndarray

    def __post_init__(self) -> None:
        validate_positive(self.T, "T")
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1:
            raise ValidationError(f"control values must have shape (K, d) with K >= 1, got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValidationError("control values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def K(self) -> int:
        return int(self.values.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.values.shape[1])

    @property
    def delta(self) -> float:
        return self.T / self.K

    @property
    def times(self) -> np.ndarray:
        """Left endpoints t_0 .. t_{K-1}."""
        return np.arange(self.K) * self.delta

    @property
    def cost(self) -> float:
        """Action 1/2 sum_k |u_k|^2 Delta."""
        return 0.5 * self.delta * float(np.sum(self.values ** 2))

    def refine(self) -> "ControlGrid":
        """Same control on a grid with twice as many intervals."""
        return ControlGrid(T=self.T, values=np.repeat(self.values, 2, axis=0))

    @classmethod
    def zeros(cls, T: float, K: int, d: int) -> "ControlGrid":
        return cls(T=T, values=np.zeros((validate_count(K, 1, "K"), d)))

    def csv_header(self) -> list:
        return ["t"] + [f"u_{i + 1}" for i in range(self.dimension)]

    def csv_rows(self) -> list:
        return [[float(t)] + [float(v) for v in row] for t, row in zip(self.times, self.values)]


@dataclass
class RolloutTape:
    """Forward-pass record needed by the adjoint.

    Attributes:
        states: Substep boundary states, shape (N+1, d), N = K * steps_per_interval
        jx: d/dx of f + g u at the four RK4 stage points, shape (N, 4, d, d)
        ju: g at the four stage points, shape (N, 4, d, d)
        h: Substep length
        steps_per_interval: Substeps per control interval
    """

    states: np.ndarray
    h: float
    steps_per_interval: int
    jx: Optional[np.ndarray] = None
    ju: Optional[np.ndarray] = None

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]


def forward(sys: ControlAffineSystem, x: np.ndarray, U: np.ndarray, T: float,
            steps_per_interval: int = 1, record_jacobians: bool = False) -> RolloutTape:
    """RK4 rollout with u held constant on each interval.

    Raises:
        IntegrationError: On the first non-finite state
    """
    K, d = U.shape
    s = steps_per_interval
    N = K * s
    h = T / N
    states = np.empty((N + 1, d))
    states[0] = x
    stages = np.empty((N, 4, d)) if record_jacobians else None
    xn = np.array(x, dtype=float)

    for n in range(N):
        u = U[n // s]
        y1 = xn
        k1 = sys.controlled_field(y1, u)
        y2 = xn + 0.5 * h * k1
        k2 = sys.controlled_field(y2, u)
        y3 = xn + 0.5 * h * k2
        k3 = sys.controlled_field(y3, u)
        y4 = xn + h * k3
        k4 = sys.controlled_field(y4, u)
        xn = xn + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(xn)):
            t = (n + 1) * h
            raise IntegrationError(f"Controlled rollout blew up at t={t:.6g}", time=t)
        states[n + 1] = xn
        if stages is not None:
            stages[n, 0], stages[n, 1], stages[n, 2], stages[n, 3] = y1, y2, y3, y4

    tape = RolloutTape(states=states, h=h, steps_per_interval=s)
    if stages is not None:
        u_stages = np.broadcast_to(np.repeat(U, s, axis=0)[:, None, :], (N, 4, d))
        tape.jx, tape.ju = sys.controlled_jacobians(stages, u_stages)
    return tape


def backward(tape: RolloutTape, terminal: np.ndarray, K: int) -> np.ndarray:
    """Propagate endpoint adjoints back through the RK4 recursion.

    Args:
        tape: Forward record with stage Jacobians
        terminal: dJ/dx_N for m objectives, shape (d, m)
        K: Number of control intervals

    Returns:
        dJ/du_k for every interval, shape (K, d, m)
    """
    if tape.jx is None or tape.ju is None:
        raise ValueError("backward needs a tape recorded with record_jacobians=True")
    h = tape.h
    s = tape.steps_per_interval
    N = tape.jx.shape[0]
    jxT = np.swapaxes(tape.jx, -1, -2)
    juT = np.swapaxes(tape.ju, -1, -2)
    lam = np.array(terminal, dtype=float)
    ubar = np.zeros((K,) + lam.shape)

    for n in range(N - 1, -1, -1):
        kb1 = (h / 6.0) * lam
        kb2 = (h / 3.0) * lam
        kb3 = (h / 3.0) * lam
        kb4 = (h / 6.0) * lam
        xbar = lam.copy()

        t4 = jxT[n, 3] @ kb4
        xbar += t4
        kb3 = kb3 + h * t4
        t3 = jxT[n, 2] @ kb3
        xbar += t3
        kb2 = kb2 + 0.5 * h * t3
        t2 = jxT[n, 1] @ kb2
        xbar += t2
        kb1 = kb1 + 0.5 * h * t2
        xbar += jxT[n, 0] @ kb1

        ubar[n // s] += juT[n, 0] @ kb1 + juT[n, 1] @ kb2 + juT[n, 2] @ kb3 + juT[n, 3] @ kb4
        lam = xbar

    return ubar


def rollout(sys: ControlAffineSystem, x: np.ndarray, u: ControlGrid,
            steps_per_interval: int = 1) -> Trajectory:
    """Deterministic RK4 trajectory of the controlled system on the fine grid."""
    x = validate_vector(x, sys.dimension, "x")
    if u.dimension != sys.dimension:
        raise ValidationError(f"control has dimension {u.dimension}, system has {sys.dimension}")
    s = validate_count(steps_per_interval, 1, "steps_per_interval")
    tape = forward(sys, x, u.values, u.T, s)
    times = np.linspace(0.0, u.T, u.K * s + 1)
    return Trajectory(times=times, states=tape.states)


def penalty_objective(sys: ControlAffineSystem, x: np.ndarray, y: np.ndarray, u: ControlGrid,
                      rho: float, steps_per_interval: int = 1) -> tuple:
    """J_rho(u) = 1/2 sum |u_k|^2 Delta + rho/2 |x_u(T) - y|^2 and its gradient.

    Returns:
        (J, gradient of shape (K, d))
    """
    x = validate_vector(x, sys.dimension, "x")
    y = validate_vector(y, sys.dimension, "y")
    tape = forward(sys, x, u.values, u.T, steps_per_interval, record_jacobians=True)
    r = tape.endpoint - y
    J = u.cost + 0.5 * rho * float(r @ r)
    grad = u.delta * u.values + backward(tape, (rho * r)[:, None], u.K)[..., 0]
    return J, grad
