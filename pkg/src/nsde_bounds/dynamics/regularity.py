"""
Regularity quantities of the drift and diffusion.

- Matrix measure (logarithmic norm) for the spectral norm
- Sampled and Gershgorin estimates of M(f) = sup_x mu[f_*(x)]
- Ellipticity, Jacobian and Lipschitz diagnostics
"""

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Sequence, Tuple

import numpy as np

from ..validators import validate_box, validate_count
from .system import ControlAffineSystem, central_difference_jacobian

if TYPE_CHECKING:
    from .families import RnnParams

logger = logging.getLogger("nsde-bounds.dynamics")


def symmetric_eigenvalues(S: np.ndarray) -> np.ndarray:
    """Ascending eigenvalues of the symmetric part of S (batched over leading axes)."""
    S = np.asarray(S, dtype=float)
    return np.linalg.eigvalsh(0.5 * (S + np.swapaxes(S, -1, -2)))


def matrix_measure(A: np.ndarray) -> np.ndarray:
    """Logarithmic norm for the spectral norm: lambda_max((A + A^T) / 2).

    Works on a single matrix (returns a float) or a batch.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise ValueError(f"matrix_measure needs square matrices, got shape {A.shape}")
    mu = symmetric_eigenvalues(A)[..., -1]
    return float(mu) if mu.ndim == 0 else mu


def spectral_norm(A: np.ndarray) -> np.ndarray:
    """Largest singular value via the symmetric eigenproblem for A^T A (batched)."""
    A = np.asarray(A, dtype=float)
    gram = np.swapaxes(A, -1, -2) @ A
    top = np.clip(symmetric_eigenvalues(gram)[..., -1], 0.0, None)
    norm = np.sqrt(top)
    return float(norm) if norm.ndim == 0 else norm


def sample_box(lo: Sequence[float], hi: Sequence[float], n_samples: int, seed: int) -> np.ndarray:
    """Uniform samples in [lo, hi], shape (n_samples, d)."""
    lo_arr, hi_arr = validate_box(lo, hi)
    rng = np.random.default_rng(seed)
    return rng.uniform(lo_arr, hi_arr, size=(n_samples, lo_arr.shape[0]))


def estimate_M(sys: ControlAffineSystem, lo: Sequence[float], hi: Sequence[float],
               n_samples: int = 1000, seed: int = 0,
               extra_points: Optional[np.ndarray] = None) -> float:
    """Sampled lower estimate of M(f) over a box.

    Takes the max of mu[f_*(x)] over the box centre, ``n_samples`` uniform
    points and any ``extra_points``.
    """
    validate_count(n_samples, 1, "n_samples")
    lo_arr, hi_arr = validate_box(lo, hi, sys.dimension)
    points = [0.5 * (lo_arr + hi_arr)[None, :], sample_box(lo_arr, hi_arr, n_samples, seed)]
    if extra_points is not None:
        points.append(np.atleast_2d(np.asarray(extra_points, dtype=float)))
    pts = np.concatenate(points, axis=0)
    mu = matrix_measure(sys.jac(pts))
    estimate = float(np.max(mu))
    logger.debug(f"estimate_M over {pts.shape[0]} points: {estimate:.6g}")
    return estimate


def gershgorin_M_bound(p: "RnnParams") -> float:
    """Certified upper bound on M(f) for the stochastic RNN family.

    Row i of the symmetrized Jacobian has diagonal -1/tau + A_ii sigma'_i and
    off-diagonal entries bounded by gamma (|A_ij| + |A_ji|) / 2. Since sigma'
    ranges over [0, gamma], a negative A_ii contributes at most 0.
    """
    A = np.asarray(p.A, dtype=float)
    abs_sym = 0.5 * (np.abs(A) + np.abs(A.T))
    off_diag = abs_sym.sum(axis=1) - np.abs(np.diag(A))
    radius = np.maximum(np.diag(A), 0.0) + off_diag
    return float(-1.0 / p.tau + p.gamma * np.max(radius))


def gershgorin_M_bound_uniform(tau: float, gamma: float, kappa: float, beta: float, m: int) -> float:
    """M(f) bound for A_ii <= kappa, |A_ij| <= beta and at most m neighbours per neuron."""
    return -1.0 / tau + gamma * (kappa + m * beta)


def network_constants(A: np.ndarray) -> Tuple[float, float, int]:
    """Smallest (kappa, beta, m) for which the uniform bound covers the weights A.

    kappa = max(max_i A_ii, 0), beta = max_{i != j} |A_ij| and m is the largest
    number of neurons coupled to one neuron in either direction.
    """
    A = np.asarray(A, dtype=float)
    off = ~np.eye(A.shape[0], dtype=bool)
    coupled = ((A != 0) | (A.T != 0)) & off
    kappa = max(float(np.max(np.diag(A))), 0.0)
    beta = float(np.max(np.abs(A[off]))) if off.any() else 0.0
    return kappa, beta, int(coupled.sum(axis=1).max())


@dataclass(frozen=True)
class EllipticityReport:
    """Observed eigenvalue range of a(x) against the declared bounds."""
    observed_min: float
    observed_max: float
    lambda0: float
    lambda1: float
    tolerance: float
    n_samples: int

    @property
    def ok(self) -> bool:
        return (self.lambda0 - self.tolerance <= self.observed_min
                and self.observed_max <= self.lambda1 + self.tolerance)

    def to_dict(self) -> dict:
        return {
            "observed_min": self.observed_min,
            "observed_max": self.observed_max,
            "lambda0": self.lambda0,
            "lambda1": self.lambda1,
            "tolerance": self.tolerance,
            "n_samples": self.n_samples,
            "ok": self.ok,
        }


def validate_ellipticity(sys: ControlAffineSystem, lo: Sequence[float], hi: Sequence[float],
                         n_samples: int = 256, seed: int = 0, eps: float = 1e-9) -> EllipticityReport:
    """Sample a(x) = g g^T over a box and compare its spectrum with [lambda0, lambda1]."""
    pts = sample_box(lo, hi, validate_count(n_samples, 1, "n_samples"), seed)
    eig = symmetric_eigenvalues(sys.a(pts))
    report = EllipticityReport(
        observed_min=float(eig[..., 0].min()),
        observed_max=float(eig[..., -1].max()),
        lambda0=sys.lambda0,
        lambda1=sys.lambda1,
        tolerance=eps,
        n_samples=n_samples,
    )
    if not report.ok:
        logger.warning(f"Ellipticity bounds violated on samples: {report.to_dict()}")
    return report


def check_jacobian(sys: ControlAffineSystem, lo: Sequence[float], hi: Sequence[float],
                   n_points: int = 100, seed: int = 0, h: float = 1e-5) -> float:
    """Max relative error between the analytic Jacobian and central differences.

    Relative to max(1, |J|_F) at each point; 0 when no analytic Jacobian exists.
    """
    if not sys.has_analytic_jacobian:
        return 0.0
    pts = sample_box(lo, hi, validate_count(n_points, 1, "n_points"), seed)
    analytic = sys.jac(pts)
    numeric = central_difference_jacobian(sys.drift, pts, h=h)
    err = np.linalg.norm(analytic - numeric, axis=(-2, -1))
    scale = np.maximum(1.0, np.linalg.norm(analytic, axis=(-2, -1)))
    return float(np.max(err / scale))


def estimate_lipschitz(fn: Callable[[np.ndarray], np.ndarray], lo: Sequence[float],
                       hi: Sequence[float], n_pairs: int = 1000, seed: int = 0) -> float:
    """Diagnostic Lipschitz estimate: max |fn(x) - fn(x')| / |x - x'| over sampled pairs.

    Uses the Frobenius norm for matrix-valued ``fn``. A lower estimate only.
    """
    lo_arr, hi_arr = validate_box(lo, hi)
    rng = np.random.default_rng(seed)
    d = lo_arr.shape[0]
    x = rng.uniform(lo_arr, hi_arr, size=(n_pairs, d))
    x2 = rng.uniform(lo_arr, hi_arr, size=(n_pairs, d))
    dist = np.linalg.norm(x - x2, axis=-1)
    diff = (fn(x) - fn(x2)).reshape(n_pairs, -1)
    ratio = np.linalg.norm(diff, axis=-1) / np.maximum(dist, 1e-300)
    return float(np.max(ratio[dist > 0])) if np.any(dist > 0) else 0.0


def certified_M(sys: ControlAffineSystem) -> Optional[float]:
    """A global upper bound on M(f) when the family provides one.

    Exact for linear drifts (constant Jacobian), Gershgorin for the RNN family,
    None otherwise.
    """
    if sys.kind == "linear":
        return matrix_measure(np.asarray(sys.params["A"], dtype=float))
    if sys.kind == "rnn":
        from .families import RnnParams

        p = RnnParams(
            tau=sys.params["tau"], A=np.asarray(sys.params["A"], dtype=float), c=sys.params["c"],
            gamma=sys.params["gamma"], sigmoid=sys.params["sigmoid"],
        )
        return gershgorin_M_bound(p)
    return None
