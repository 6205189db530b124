"""
Fixed-step RK4 integration of the autonomous flow x' = f(x) and of the
variational equation Lambda' = f_*(phi_t(x)) Lambda, Lambda(0) = I.

The private integrator works on batches of initial points so that
probe-set computations run as a single vectorized pass.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from ..core.exceptions import IntegrationError
from ..dynamics.system import ControlAffineSystem
from ..validators import ValidationError, validate_count, validate_positive, validate_vector

logger = logging.getLogger("nsde-bounds.flow")


@dataclass(frozen=True)
class Trajectory:
    """States (and optionally flow Jacobians) on a uniform time grid.

    Attributes:
        times: Grid 0 = t_0 < ... < t_K = T, shape (K+1,)
        states: Shape (K+1, d)
        jacobians: Lambda_k, shape (K+1, d, d); Lambda_0 = I
    """

    times: np.ndarray
    states: np.ndarray
    jacobians: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.times.ndim != 1 or self.times.shape[0] < 2:
            raise ValidationError("trajectory needs at least two grid times")
        if self.states.shape[0] != self.times.shape[0]:
            raise ValidationError("states and times disagree in length")
        steps = np.diff(self.times)
        if np.max(np.abs(steps - steps[0])) > 1e-12 * max(1.0, abs(self.times[-1])):
            raise ValidationError("trajectory grid must be uniform")
        if self.jacobians is not None and not np.allclose(
            self.jacobians[0], np.eye(self.states.shape[-1]), atol=1e-15
        ):
            raise ValidationError("flow Jacobian must start at the identity")

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]

    @property
    def dimension(self) -> int:
        return int(self.states.shape[-1])

    def csv_header(self) -> List[str]:
        d = self.dimension
        header = ["t"] + [f"x_{i + 1}" for i in range(d)]
        if self.jacobians is not None:
            header += [f"L_{i + 1}{j + 1}" for i in range(d) for j in range(d)]
        return header

    def csv_rows(self) -> List[List[float]]:
        """Rows t, x_1..x_d, then Lambda entries row-major when present."""
        rows = []
        for k, t in enumerate(self.times):
            row = [float(t)] + [float(v) for v in self.states[k]]
            if self.jacobians is not None:
                row += [float(v) for v in self.jacobians[k].reshape(-1)]
            rows.append(row)
        return rows


def rk4_step(fn: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float) -> np.ndarray:
    """Single classical RK4 step for an autonomous field."""
    k1 = fn(x)
    k2 = fn(x + 0.5 * h * k1)
    k3 = fn(x + 0.5 * h * k2)
    k4 = fn(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_finite(state: np.ndarray, t: float, what: str = "state") -> None:
    if not np.all(np.isfinite(state)):
        raise IntegrationError(f"Non-finite {what} at t={t:.6g} (blow-up)", time=t)


def integrate_flow(sys: ControlAffineSystem, x0: np.ndarray, T: float, steps: int,
                   with_jacobian: bool = False) -> Tuple[np.ndarray, np.ndarray, Optional[np.ndarray]]:
    """RK4 for the flow (and optionally the variational equation) from a batch of points.

    Args:
        sys: System whose drift generates the flow
        x0: Initial points, shape (d,) or (n, d)
        T: Horizon
        steps: Number of RK4 steps
        with_jacobian: Co-integrate Lambda' = f_*(x) Lambda

    Returns:
        (times, states, jacobians) with states shaped (steps+1, *x0.shape) and
        jacobians (steps+1, *x0.shape[:-1], d, d) or None

    Raises:
        IntegrationError: On the first non-finite state
    """
    T = validate_positive(T, "T")
    steps = validate_count(steps, 1, "steps")
    x = np.array(x0, dtype=float)
    if x.shape[-1] != sys.dimension:
        raise ValidationError(f"initial point has dimension {x.shape[-1]}, system has {sys.dimension}")
    d = sys.dimension
    h = T / steps
    times = np.linspace(0.0, T, steps + 1)

    states = np.empty((steps + 1,) + x.shape)
    states[0] = x
    jacs = None
    lam = None
    if with_jacobian:
        lam = np.broadcast_to(np.eye(d), x.shape[:-1] + (d, d)).copy()
        jacs = np.empty((steps + 1,) + lam.shape)
        jacs[0] = lam

    for k in range(steps):
        if lam is None:
            x = rk4_step(sys.f, x, h)
        else:
            # combined RK4 on (x, Lambda) so both use the same stage points
            k1x = sys.f(x)
            k1l = sys.jac(x) @ lam
            y2 = x + 0.5 * h * k1x
            k2x = sys.f(y2)
            k2l = sys.jac(y2) @ (lam + 0.5 * h * k1l)
            y3 = x + 0.5 * h * k2x
            k3x = sys.f(y3)
            k3l = sys.jac(y3) @ (lam + 0.5 * h * k2l)
            y4 = x + h * k3x
            k4x = sys.f(y4)
            k4l = sys.jac(y4) @ (lam + h * k3l)
            x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            lam = lam + (h / 6.0) * (k1l + 2.0 * k2l + 2.0 * k3l + k4l)
            _check_finite(lam, times[k + 1], "flow Jacobian")
            jacs[k + 1] = lam
        _check_finite(x, times[k + 1])
        states[k + 1] = x

    return times, states, jacs


def flow(sys: ControlAffineSystem, x: np.ndarray, T: float, steps: int) -> Trajectory:
    """Trajectory of x' = f(x) from x; the endpoint approximates phi_T(x)."""
    x = validate_vector(x, sys.dimension, "x")
    times, states, _ = integrate_flow(sys, x, T, steps)
    return Trajectory(times=times, states=states)


def flow_jacobian(sys: ControlAffineSystem, x_bar: np.ndarray, T: float, steps: int) -> Trajectory:
    """Trajectory with flow Jacobians; the last one approximates (phi_T)_*(x_bar)."""
    x_bar = validate_vector(x_bar, sys.dimension, "x_bar")
    times, states, jacs = integrate_flow(sys, x_bar, T, steps, with_jacobian=True)
    return Trajectory(times=times, states=states, jacobians=jacs)


def flow_map(sys: ControlAffineSystem, points: np.ndarray, T: float, steps: int) -> np.ndarray:
    """phi_T applied to a batch of points, shape (n, d) -> (n, d)."""
    _, states, _ = integrate_flow(sys, np.atleast_2d(points), T, steps)
    return states[-1]


def default_steps(T: float, steps_per_unit_time: int = 1000) -> int:
    """Step count for a horizon at the configured density (at least 1)."""
    return max(1, int(np.ceil(T * steps_per_unit_time)))
