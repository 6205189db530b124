"""
Stability constant S_T(f) = int_0^T sup_x ||(phi_{T-t})_*(x)||^2 dt.

Numerically the sup runs over a finite probe set, which gives a lower
estimate; the closed form (e^{2MT} - 1) / (2M) gives the upper side when M
bounds the matrix measure of f_* everywhere.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid
from scipy.stats import qmc

from ..dynamics.regularity import matrix_measure, spectral_norm
from ..dynamics.system import ControlAffineSystem
from ..validators import ValidationError, validate_box, validate_count, validate_positive, validate_vector
from .integrators import Trajectory, integrate_flow

logger = logging.getLogger("nsde-bounds.flow")


@dataclass(frozen=True)
class StabilityEstimate:
    """Numeric S_T(f) with the closed-form bounds it should respect."""
    value: float
    T: float
    method: str
    M: Optional[float] = None
    bound: Optional[float] = None
    bound_displayed: Optional[float] = None
    n_probes: int = 0
    integrand: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def within_bound(self) -> Optional[bool]:
        if self.bound is None:
            return None
        return self.value <= self.bound + 1e-6 * (1.0 + self.bound)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "T": self.T,
            "method": self.method,
            "M": self.M,
            "bound": self.bound,
            "bound_displayed": self.bound_displayed,
            "n_probes": self.n_probes,
            "within_bound": self.within_bound,
        }


def s_t_bound(M: float, T: float) -> float:
    """Upper bound on S_T(f) from M(f): (e^{2MT} - 1) / (2M), or T when M = 0."""
    T = validate_positive(T, "T")
    M = float(M)
    if M == 0.0:
        return T
    return float(np.expm1(2.0 * M * T) / (2.0 * M))


def s_t_bound_displayed(M: float, T: float) -> float:
    """The looser statement form e^{2 max(M,0) T} / (2|M|), or T when M = 0."""
    T = validate_positive(T, "T")
    M = float(M)
    if M == 0.0:
        return T
    return float(np.exp(2.0 * max(M, 0.0) * T) / (2.0 * abs(M)))


def default_probe_points(lo: Sequence[float], hi: Sequence[float], n: int, seed: int = 0,
                         extra: Optional[Sequence[Sequence[float]]] = None) -> np.ndarray:
    """Latin-hypercube probes in a box, followed by any extra points."""
    lo_arr, hi_arr = validate_box(lo, hi)
    sampler = qmc.LatinHypercube(d=lo_arr.shape[0], seed=seed)
    probes = qmc.scale(sampler.random(validate_count(n, 1, "n")), lo_arr, hi_arr)
    if extra:
        probes = np.concatenate([probes, np.atleast_2d(np.asarray(extra, dtype=float))], axis=0)
    return probes


def s_t_numeric(sys: ControlAffineSystem, T: float, probe_points: np.ndarray, steps: int,
                M: Optional[float] = None) -> StabilityEstimate:
    """Trapezoid estimate of S_T(f) with the sup restricted to the probe points.

    All probes are integrated in one batched pass; the integrand at grid time
    t_k is the largest ||Lambda(T - t_k)||^2 over probes.
    """
    probes = np.atleast_2d(np.asarray(probe_points, dtype=float))
    if probes.shape[0] == 0:
        raise ValidationError("probe set must be nonempty")
    if probes.shape[-1] != sys.dimension:
        raise ValidationError(f"probe points must have dimension {sys.dimension}")

    times, _, jacs = integrate_flow(sys, probes, T, steps, with_jacobian=True)
    norms_sq = spectral_norm(jacs) ** 2
    sup_sq = np.max(norms_sq, axis=1)
    # integrand(t_k) = sup ||(phi_{T - t_k})_*||^2 = sup_sq[K - k]
    integrand = sup_sq[::-1]
    value = float(trapezoid(integrand, times))

    bound = s_t_bound(M, T) if M is not None else None
    displayed = s_t_bound_displayed(M, T) if M is not None else None
    estimate = StabilityEstimate(
        value=value, T=float(T), method="sampled-sup", M=M, bound=bound,
        bound_displayed=displayed, n_probes=probes.shape[0], integrand=integrand,
    )
    if estimate.within_bound is False:
        logger.warning(f"S_T numeric {value:.6g} exceeds closed-form bound {bound:.6g} (M={M})")
    return estimate


def s_t_along_trajectory(sys: ControlAffineSystem, trajectory: Trajectory, steps: int,
                         n_nodes: int = 21, M: Optional[float] = None) -> StabilityEstimate:
    """int_0^T ||(phi_{T-t})_*(x(t))||^2 dt along the states of a given trajectory.

    The flow Jacobian is integrated from ``n_nodes`` states of the trajectory
    over the remaining horizon; ``steps`` is the step count for the full horizon.
    """
    n_nodes = validate_count(n_nodes, 2, "n_nodes")
    T = trajectory.horizon
    K = trajectory.times.shape[0] - 1
    idx = np.unique(np.round(np.linspace(0, K, n_nodes)).astype(int))
    node_times = trajectory.times[idx]
    values = np.empty(idx.shape[0])
    for j, k in enumerate(idx):
        remaining = T - trajectory.times[k]
        if remaining <= 0:
            values[j] = 1.0
            continue
        sub_steps = max(1, int(round(steps * remaining / T)))
        _, _, jacs = integrate_flow(sys, trajectory.states[k], remaining, sub_steps, with_jacobian=True)
        values[j] = spectral_norm(jacs[-1]) ** 2
    value = float(trapezoid(values, node_times))
    return StabilityEstimate(
        value=value, T=T, method="along-trajectory", M=M,
        bound=s_t_bound(M, T) if M is not None else None,
        bound_displayed=s_t_bound_displayed(M, T) if M is not None else None,
        n_probes=int(idx.shape[0]), integrand=values,
    )


@dataclass(frozen=True)
class CoppelReport:
    """Pointwise comparison of ||Lambda(t)|| with the matrix-measure bounds."""
    times: np.ndarray
    norms: np.ndarray
    measure_bound: np.ndarray
    uniform_bound: Optional[np.ndarray]
    max_violation_measure: float
    max_violation_uniform: Optional[float]
    M: Optional[float]

    @property
    def max_violation(self) -> float:
        vals = [self.max_violation_measure]
        if self.max_violation_uniform is not None:
            vals.append(self.max_violation_uniform)
        return max(vals)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "max_violation": self.max_violation,
            "max_violation_measure": self.max_violation_measure,
            "max_violation_uniform": self.max_violation_uniform,
            "final_norm": float(self.norms[-1]),
            "final_measure_bound": float(self.measure_bound[-1]),
        }


def coppel_check(sys: ControlAffineSystem, x_bar: np.ndarray, T: float, steps: int,
                 M: Optional[float] = None) -> CoppelReport:
    """Check ||Lambda(t)|| <= exp(int_0^t mu[f_*(phi_s)] ds) and <= e^{Mt} on the grid.

    Violations are relative: max over t of (||Lambda|| - bound) / bound, floored at 0.
    """
    x_bar = validate_vector(x_bar, sys.dimension, "x_bar")
    times, states, jacs = integrate_flow(sys, x_bar, T, steps, with_jacobian=True)
    norms = spectral_norm(jacs)
    mu = matrix_measure(sys.jac(states))
    measure_bound = np.exp(cumulative_trapezoid(mu, times, initial=0.0))
    violation_measure = float(max(0.0, np.max((norms - measure_bound) / measure_bound)))

    uniform_bound = None
    violation_uniform = None
    if M is not None:
        uniform_bound = np.exp(float(M) * times)
        violation_uniform = float(max(0.0, np.max((norms - uniform_bound) / uniform_bound)))

    report = CoppelReport(
        times=times, norms=norms, measure_bound=measure_bound, uniform_bound=uniform_bound,
        max_violation_measure=violation_measure, max_violation_uniform=violation_uniform, M=M,
    )
    if report.max_violation > 1e-6:
        logger.warning(f"Coppel bound violated by {report.max_violation:.3g} (relative)")
    return report
