"""
Direct-transcription solver for the minimum action I_T(x, y).

The control is piecewise constant on K intervals and the dynamics are the
RK4 rollout of x' = f(x) + g(x) u. The endpoint constraint x_u(T) = y is
enforced by a quadratic penalty whose weight rho grows geometrically until
the endpoint residual falls below tolerance. Each penalty level is minimized
by descent with backtracking line search; the direction is the gradient
preconditioned by the Gauss-Newton metric of J_rho, which needs only a d x d
solve thanks to the Woodbury identity.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np

from ..config.models import SolverConfig
from ..core.exceptions import IntegrationError
from ..core.logging import get_structured_logger
from ..dynamics.regularity import certified_M, estimate_M
from ..dynamics.system import ControlAffineSystem
from ..flow.integrators import default_steps, flow
from ..flow.stability import StabilityEstimate, s_t_bound
from ..montecarlo.rng import STREAM_RESTART, derive_generator
from ..validators import ValidationError, validate_count, validate_positive, validate_vector
from .bounds import fbl_control, lower_bound_I, stability_value, upper_bound_I
from .grid import ControlGrid, backward, forward

logger = logging.getLogger("nsde-bounds.control")
slog = get_structured_logger("control.solver")


@dataclass
class ActionCertificate:
    """Numeric minimum action with the two analytic bounds around it.

    The numeric value is a local minimum of the transcribed problem, hence an
    upper estimate of the global minimum I_T(x, y).
    """

    value: float
    upper_bound: float
    lower_bound: float
    residual: float
    endpoint_tol: float
    iterations: int
    penalty: float
    converged: bool
    control: ControlGrid
    fbl_cost: float
    s_t: float
    M: Optional[float]
    lower_bound_certified: bool
    restart_index: int = 0
    restart_values: List[float] = field(default_factory=list)

    @property
    def tolerance(self) -> float:
        return 1e-6 * (1.0 + self.upper_bound)

    @property
    def sandwich_ok(self) -> bool:
        """lower <= value <= upper within tolerance (meaningful when converged)."""
        tol = self.tolerance
        return self.lower_bound - tol <= self.value <= self.upper_bound + tol

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "upper_bound": self.upper_bound,
            "lower_bound": self.lower_bound,
            "residual": self.residual,
            "endpoint_tol": self.endpoint_tol,
            "iterations": self.iterations,
            "penalty": self.penalty,
            "converged": self.converged,
            "sandwich_ok": self.sandwich_ok,
            "fbl_cost": self.fbl_cost,
            "s_t": self.s_t,
            "M": self.M,
            "lower_bound_certified": self.lower_bound_certified,
            "K": self.control.K,
            "T": self.control.T,
            "restart_index": self.restart_index,
            "restart_values": self.restart_values,
            "note": "value is a local minimum of the transcribed problem (an upper estimate of I_T)",
        }


@dataclass
class _LocalResult:
    U: np.ndarray
    residual: float
    iterations: int
    penalty: float
    converged: bool
    value: float
    index: int


def _sensitivities(sys, x, y, U, T, s, rho):
    """Objective pieces, gradient and endpoint sensitivity at U."""
    K, d = U.shape
    tape = forward(sys, x, U, T, s, record_jacobians=True)
    r = tape.endpoint - y
    terminal = np.concatenate([np.eye(d), r[:, None]], axis=1)
    ubar = backward(tape, terminal, K)
    delta = T / K
    # S[:, k*d:(k+1)*d] = d x_K / d u_k
    S = np.transpose(ubar[..., :d], (2, 0, 1)).reshape(d, K * d)
    grad = (delta * U + rho * ubar[..., d]).reshape(-1)
    J = 0.5 * delta * float(np.sum(U ** 2)) + 0.5 * rho * float(r @ r)
    return J, grad, S, r


def _objective(sys, x, y, U, T, s, rho) -> float:
    tape = forward(sys, x, U, T, s)
    r = tape.endpoint - y
    return 0.5 * (T / U.shape[0]) * float(np.sum(U ** 2)) + 0.5 * rho * float(r @ r)


def _descent_direction(grad: np.ndarray, S: np.ndarray, delta: float, rho: float) -> np.ndarray:
    """Solve (delta I + rho S^T S) p = -grad through the d x d Woodbury system."""
    d = S.shape[0]
    small = (delta / rho) * np.eye(d) + S @ S.T
    try:
        correction = S.T @ np.linalg.solve(small, S @ grad)
    except np.linalg.LinAlgError:
        return -grad
    p = -(grad - correction) / delta
    if not np.all(np.isfinite(p)) or float(grad @ p) >= 0.0:
        return -grad
    return p


def _restore_feasibility(sys, x, y, U, T, s, residual: float, max_steps: int = 3) -> tuple:
    """Minimum-norm Gauss-Newton corrections toward x_u(T) = y.

    Applied after penalty convergence, so the reported value is the cost of
    a control that meets the endpoint to roundoff rather than to tolerance.
    """
    K, d = U.shape
    for _ in range(max_steps):
        _, _, S, r = _sensitivities(sys, x, y, U, T, s, 0.0)
        try:
            step = -S.T @ np.linalg.solve(S @ S.T, r)
        except np.linalg.LinAlgError:
            break
        trial = U + step.reshape(K, d)
        try:
            trial_residual = float(np.linalg.norm(forward(sys, x, trial, T, s).endpoint - y))
        except IntegrationError:
            break
        if not trial_residual < residual:
            break
        U, residual = trial, trial_residual
    return U, residual


def _minimize_local(sys: ControlAffineSystem, x: np.ndarray, y: np.ndarray, T: float,
                    U0: np.ndarray, opts: SolverConfig, endpoint_tol: float, index: int) -> _LocalResult:
    U = np.array(U0, dtype=float)
    K, d = U.shape
    s = opts.steps_per_interval
    delta = T / K
    rho = opts.rho_initial
    iterations = 0
    residual = float("inf")

    while True:
        # minimize J_rho at the current penalty level
        while iterations < opts.max_iterations:
            J, grad, S, r = _sensitivities(sys, x, y, U, T, s, rho)
            p = _descent_direction(grad, S, delta, rho)
            slope = float(grad @ p)
            iterations += 1
            if -slope <= opts.inner_tol * max(1.0, J):
                break
            step = 1.0
            accepted = False
            flat = U.reshape(-1)
            for _ in range(40):
                trial = (flat + step * p).reshape(K, d)
                try:
                    J_trial = _objective(sys, x, y, trial, T, s, rho)
                except IntegrationError:
                    J_trial = float("inf")
                if np.isfinite(J_trial) and J_trial <= J + 1e-4 * step * slope:
                    U = trial
                    accepted = True
                    break
                step *= 0.5
            if not accepted:
                break

        residual = float(np.linalg.norm(forward(sys, x, U, T, s).endpoint - y))
        slog.debug("penalty level done", restart=index, rho=rho, residual=residual,
                   iterations=iterations)
        if residual <= endpoint_tol:
            converged = True
            break
        if rho >= opts.rho_max or iterations >= opts.max_iterations:
            converged = False
            break
        rho = min(rho * opts.rho_factor, opts.rho_max)

    if converged:
        U, residual = _restore_feasibility(sys, x, y, U, T, s, residual)

    value = 0.5 * delta * float(np.sum(U ** 2))
    return _LocalResult(U=U, residual=residual, iterations=iterations, penalty=rho,
                        converged=converged, value=value, index=index)


def resolve_stability(sys: ControlAffineSystem, x: np.ndarray, y: np.ndarray, T: float,
                      s_t: Union[None, float, StabilityEstimate] = None,
                      seed: int = 0) -> tuple:
    """Upper value for S_T(f) to use in the lower bound.

    Returns:
        (S, M, certified) where M is the matrix-measure bound the value came from
    """
    if s_t is not None:
        certified = not isinstance(s_t, StabilityEstimate) or s_t.bound is not None
        M = s_t.M if isinstance(s_t, StabilityEstimate) else None
        return stability_value(s_t), M, certified
    M = certified_M(sys)
    if M is not None:
        return s_t_bound(M, T), M, True
    # no global bound: sample M over a box around the endpoints
    span = np.maximum(np.abs(y - x), 1.0)
    lo = np.minimum(x, y) - span
    hi = np.maximum(x, y) + span
    M = estimate_M(sys, lo, hi, n_samples=2000, seed=seed)
    logger.warning(f"No certified M(f) for kind={sys.kind!r}; sampled M={M:.4g} makes the lower bound heuristic")
    return s_t_bound(M, T), M, False


def solve_min_action(sys: ControlAffineSystem, x, y, T: float, K: int,
                     opts: Optional[SolverConfig] = None,
                     s_t: Union[None, float, StabilityEstimate] = None,
                     seed: int = 0, threads: int = 1,
                     initial: Optional[ControlGrid] = None) -> ActionCertificate:
    """Minimize 1/2 int |u|^2 over piecewise-constant controls steering x to y in time T.

    Args:
        sys: Control-affine system
        x, y: Endpoints
        T: Horizon
        K: Number of control intervals (>= 2)
        opts: Solver settings; ``opts.K`` is ignored in favour of ``K``
        s_t: Upper bound on S_T(f) (or an estimate) for the lower bound; derived
            from the system family when omitted
        seed: Seed for restart perturbations
        threads: Worker threads for restarts
        initial: Warm start; the feedback-linearizing control otherwise

    Returns:
        ActionCertificate; ``converged`` is False when the endpoint tolerance
        was not met within the iteration budget
    """
    opts = opts or SolverConfig()
    x = validate_vector(x, sys.dimension, "x")
    y = validate_vector(y, sys.dimension, "y")
    T = validate_positive(T, "T")
    K = validate_count(K, 2, "K")
    endpoint_tol = opts.endpoint_tol if opts.endpoint_tol is not None else 1e-6 * (1.0 + float(np.linalg.norm(y)))

    fbl = fbl_control(sys, x, y, T, K)
    if initial is not None:
        if initial.K != K or initial.dimension != sys.dimension:
            raise ValidationError("warm start must have K intervals and the system dimension")
        start = initial.values
    else:
        start = fbl.values

    starts = [np.array(start)]
    scale = opts.restart_scale * (1.0 + float(np.max(np.abs(start))))
    for i in range(1, opts.n_restarts + 1):
        rng = derive_generator(seed, STREAM_RESTART, i)
        starts.append(start + scale * rng.standard_normal(start.shape))

    def run(i: int) -> _LocalResult:
        return _minimize_local(sys, x, y, T, starts[i], opts, endpoint_tol, i)

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(len(starts))))
    else:
        results = [run(i) for i in range(len(starts))]

    # converged first, then lowest value, then lowest restart index
    best = min(results, key=lambda r: (not r.converged, r.value, r.index))

    S, M, certified = resolve_stability(sys, x, y, T, s_t, seed)
    phi_T = flow(sys, x, T, default_steps(T)).endpoint
    lower = lower_bound_I(sys, x, y, T, S, phi_T=phi_T)
    upper = upper_bound_I(sys, x, y, T, opts.quad_points)

    cert = ActionCertificate(
        value=best.value,
        upper_bound=upper,
        lower_bound=lower,
        residual=best.residual,
        endpoint_tol=endpoint_tol,
        iterations=sum(r.iterations for r in results),
        penalty=best.penalty,
        converged=best.converged,
        control=ControlGrid(T=T, values=best.U),
        fbl_cost=fbl.cost,
        s_t=S,
        M=M,
        lower_bound_certified=certified,
        restart_index=best.index,
        restart_values=[r.value for r in results],
    )
    slog.info("min-action solve finished", value=cert.value, lower=lower, upper=upper,
              residual=cert.residual, converged=cert.converged, iterations=cert.iterations)
    if not cert.converged:
        logger.warning(f"Endpoint residual {cert.residual:.3g} above tolerance {endpoint_tol:.3g}")
    elif not cert.sandwich_ok:
        logger.warning(f"Certificate outside bounds: {lower:.6g} <= {cert.value:.6g} <= {upper:.6g} fails")
    return cert
