"""
Monte Carlo approximation rate of F and the variance bound that controls it.

The N-sample estimate F_N(x) = N^{-1} sum_i <alpha, X_T^{x,i}> has
E||F - F_N||^2_{L2(pi)} = V_pi(F) / N; the rate experiment measures the left
side on a grid of N and fits its log-log slope.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.stats import linregress, spearmanr

from ..core.logging import get_structured_logger
from ..flow.integrators import default_steps, flow_map
from ..validators import ValidationError, validate_count, validate_positive, validate_vector
from .rng import STREAM_PILOT, STREAM_REPLICATE
from .simulate import (
    DEFAULT_BLOCK_SIZE,
    McEstimate,
    NeuralSdeModel,
    Sampler,
    em_endpoints,
    sample_pi,
    summarize,
)

logger = logging.getLogger("nsde-bounds.montecarlo")
slog = get_structured_logger("montecarlo.maurey")

PILOT_FACTOR = 64

ReferenceFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class MaureyRow:
    """Mean squared L2(pi) error at one N over the repetitions."""
    N: int
    mse: float
    se: float

    @property
    def scaled(self) -> float:
        """N * MSE, an estimate of V_pi(F)."""
        return self.N * self.mse

    @property
    def scaled_se(self) -> float:
        return self.N * self.se


@dataclass(frozen=True)
class MaureyResult:
    rows: List[MaureyRow]
    slope: Optional[float]
    slope_stderr: Optional[float]
    intercept: Optional[float]
    spearman: Optional[float]
    reference: str
    reference_error: float
    n_points: int
    reps: int
    seed: int
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rows": [
                {"N": r.N, "mse": r.mse, "se": r.se, "N_times_mse": r.scaled, "N_times_se": r.scaled_se}
                for r in self.rows
            ],
            "slope": self.slope,
            "slope_stderr": self.slope_stderr,
            "intercept": self.intercept,
            "spearman": self.spearman,
            "reference": self.reference,
            "reference_error": self.reference_error,
            "n_points": self.n_points,
            "reps": self.reps,
            "seed": self.seed,
            "notes": self.notes,
        }

    def csv_header(self) -> List[str]:
        return ["N", "mse", "se"]

    def csv_rows(self) -> List[list]:
        return [[r.N, r.mse, r.se] for r in self.rows]


def linear_reference(model: NeuralSdeModel) -> ReferenceFn:
    """Exact mean of the Euler-Maruyama endpoint for a linear drift: <alpha, (I + h A)^L x>."""
    if model.system.kind != "linear":
        raise ValidationError("linear_reference needs a linear system")
    A = np.asarray(model.system.params["A"], dtype=float)
    step_matrix = np.linalg.matrix_power(np.eye(model.dimension) + model.step * A, model.L)
    readout = step_matrix.T @ model.alpha
    return lambda points: np.asarray(points, dtype=float) @ readout


def _validate_n_list(N_list: Sequence[int]) -> List[int]:
    values = [validate_count(n, 1, "N_list entry") for n in N_list]
    if len(values) < 2:
        raise ValidationError("N_list needs at least two entries")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError("N_list must be strictly increasing")
    return values


def _mean_readout(model: NeuralSdeModel, points: np.ndarray, N: int, seed: int, key: tuple,
                  block_size: int, threads: int) -> np.ndarray:
    starts = np.repeat(points, N, axis=0)
    z = model.readout(em_endpoints(model, starts, seed=seed, key=key, block_size=block_size, threads=threads))
    return z.reshape(points.shape[0], N)


def maurey_rate_experiment(model: NeuralSdeModel, sampler: Sampler, N_list: Sequence[int], reps: int,
                           seed: int = 0, n_points: int = 16,
                           reference: Optional[ReferenceFn] = None,
                           block_size: int = DEFAULT_BLOCK_SIZE, threads: int = 1) -> MaureyResult:
    """Estimate E||F - F_N||^2_{L2(pi)} for every N and fit its decay.

    The L2(pi) norm is itself estimated on ``n_points`` draws from pi. F comes
    from ``reference`` when given, from the closed form for linear systems,
    and otherwise from a pilot estimate with 64 max(N_list) paths per point on
    a fixed point set; the pilot's mean squared error is reported as
    ``reference_error`` and inflates every MSE by about that much.

    Returns:
        MaureyResult with one row per N and the least-squares slope of log MSE
        against log N (None when some MSE is zero)
    """
    N_values = _validate_n_list(N_list)
    reps = validate_count(reps, 2, "reps")
    n_points = validate_count(n_points, 1, "n_points")
    notes: List[str] = []

    fixed_points = None
    reference_error = 0.0
    if reference is not None:
        kind = "user"
    elif model.system.kind == "linear":
        reference = linear_reference(model)
        kind = "linear-closed-form"
    else:
        kind = "pilot"
        N_ref = PILOT_FACTOR * N_values[-1]
        fixed_points = sample_pi(sampler, n_points, seed, STREAM_PILOT)
        pilot = _mean_readout(model, fixed_points, N_ref, seed, (STREAM_PILOT,), block_size, threads)
        pilot_mean = pilot.mean(axis=1)
        reference_error = float(np.mean(np.var(pilot, axis=1, ddof=1)) / N_ref)
        notes.append(f"reference F from a pilot with {N_ref} paths per point on a fixed point set")

        def reference(points: np.ndarray) -> np.ndarray:
            return pilot_mean

    rows: List[MaureyRow] = []
    for j, N in enumerate(N_values):
        errors = np.empty(reps)
        for r in range(reps):
            points = fixed_points if fixed_points is not None else sample_pi(
                sampler, n_points, seed, STREAM_REPLICATE, j, r
            )
            z = _mean_readout(model, points, N, seed, (STREAM_REPLICATE, j, r), block_size, threads)
            errors[r] = float(np.mean((z.mean(axis=1) - reference(points)) ** 2))
        estimate = summarize(errors, seed)
        rows.append(MaureyRow(N=N, mse=estimate.mean, se=estimate.se))
        slog.debug("maurey row", N=N, mse=estimate.mean, se=estimate.se)

    mse = np.array([row.mse for row in rows])
    slope = slope_stderr = intercept = spearman = None
    if np.all(mse > 0):
        fit = linregress(np.log(N_values), np.log(mse))
        slope, slope_stderr, intercept = float(fit.slope), float(fit.stderr), float(fit.intercept)
        rho, _ = spearmanr(N_values, mse)
        spearman = float(rho)
    else:
        notes.append("some MSE values are zero; no log-log fit")

    result = MaureyResult(rows=rows, slope=slope, slope_stderr=slope_stderr, intercept=intercept,
                          spearman=spearman, reference=kind, reference_error=reference_error,
                          n_points=n_points, reps=reps, seed=seed, notes=notes)
    slog.info("maurey experiment finished", slope=slope, spearman=spearman, reference=kind)
    return result


def flow_second_moment(model: NeuralSdeModel, sampler: Sampler, n: int, seed: int = 0,
                       steps: Optional[int] = None) -> McEstimate:
    """int |phi_T(x)|^2 pi(dx) by sampling x from pi and integrating the flow."""
    points = sample_pi(sampler, validate_count(n, 2, "n"), seed)
    ends = flow_map(model.system, points, model.T, steps or default_steps(model.T))
    return summarize(np.sum(ends ** 2, axis=1), seed)


def vpi_upper_bound(model: NeuralSdeModel, s_t: float, pi_second_moment: float,
                    k2: float = 1.0, c2: float = 1.0) -> float:
    """Right-hand side of the variance bound

        k2 |alpha|^2 (lambda1 S / (c2 lambda0 T))^{d/2} (lambda1 d S / c2 + int |phi_T|^2 dpi)

    with S an upper bound on S_T(f). k2 and c2 have no closed form and are inputs.
    """
    k2 = validate_positive(k2, "k2")
    c2 = validate_positive(c2, "c2")
    S = validate_positive(s_t, "s_t")
    m2 = validate_positive(pi_second_moment, "pi_second_moment", allow_zero=True)
    sys = model.system
    d = model.dimension
    alpha_sq = float(model.alpha @ model.alpha)
    ratio = sys.lambda1 * S / (c2 * sys.lambda0 * model.T)
    return float(k2 * alpha_sq * ratio ** (d / 2.0) * (sys.lambda1 * d * S / c2 + m2))


@dataclass(frozen=True)
class LinearizedGaussian:
    """Gaussian picture of X_T: mean phi_T(x), covariance of the linearization along the flow."""
    mean: np.ndarray
    covariance: np.ndarray

    def readout_variance(self, alpha: np.ndarray) -> float:
        """Variance of <alpha, X_T> under the Gaussian picture."""
        alpha = np.asarray(alpha, dtype=float)
        return float(alpha @ self.covariance @ alpha)

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "covariance": self.covariance.tolist()}


def linearized_gaussian(model: NeuralSdeModel, x, steps: Optional[int] = None) -> LinearizedGaussian:
    """Integrate x' = f(x) with P' = J P + P J^T + g g^T, J = f_*(x), P(0) = 0.

    P(T) is the controllability Gramian of the SDE linearized along the
    zero-control trajectory; for a linear system it is W(T) exactly.
    """
    sys = model.system
    x = validate_vector(x, sys.dimension, "x")
    steps = validate_count(steps or default_steps(model.T), 1, "steps")
    h = model.T / steps

    def rhs(state: np.ndarray, P: np.ndarray) -> tuple:
        J = sys.jac(state)
        return sys.f(state), J @ P + P @ J.T + sys.a(state)

    P = np.zeros((sys.dimension, sys.dimension))
    for _ in range(steps):
        k1x, k1p = rhs(x, P)
        k2x, k2p = rhs(x + 0.5 * h * k1x, P + 0.5 * h * k1p)
        k3x, k3p = rhs(x + 0.5 * h * k2x, P + 0.5 * h * k2p)
        k4x, k4p = rhs(x + h * k3x, P + h * k3p)
        x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        P = P + (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
        P = 0.5 * (P + P.T)
    return LinearizedGaussian(mean=x, covariance=P)
