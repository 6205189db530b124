"""
Built-in model families: linear SDEs and stochastic recurrent neural nets,
plus systems written as arithmetic expressions.
"""

import logging
from dataclasses import dataclass, replace
from typing import Callable, Dict, NamedTuple, Optional

import numpy as np
from scipy.special import expit

from ..config.models import BoxConfig, SystemConfig
from ..validators import (
    ValidationError,
    validate_box,
    validate_positive,
    validate_square_matrix,
)
from .expression import (
    compile_jacobian,
    compile_matrix_expressions,
    compile_vector_expressions,
    referenced_variables,
)
from .regularity import symmetric_eigenvalues
from .system import ControlAffineSystem

logger = logging.getLogger("nsde-bounds.dynamics")


class Sigmoid(NamedTuple):
    """Scalar nonlinearity with 0 <= sigma' <= gamma."""
    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]
    gamma: float


def _logistic_derivative(r: np.ndarray) -> np.ndarray:
    s = expit(r)
    return s * (1.0 - s)


SIGMOIDS: Dict[str, Sigmoid] = {
    "tanh": Sigmoid("tanh", np.tanh, lambda r: 1.0 - np.tanh(r) ** 2, 1.0),
    "logistic": Sigmoid("logistic", expit, _logistic_derivative, 0.25),
    "arctan": Sigmoid("arctan", np.arctan, lambda r: 1.0 / (1.0 + r * r), 1.0),
    "softsign": Sigmoid("softsign", lambda r: r / (1.0 + np.abs(r)),
                        lambda r: 1.0 / (1.0 + np.abs(r)) ** 2, 1.0),
}


def get_sigmoid(name: str) -> Sigmoid:
    """Look up a registered sigmoid by name."""
    try:
        return SIGMOIDS[name]
    except KeyError:
        raise ValidationError(f"Unknown sigmoid {name!r}; registered: {sorted(SIGMOIDS)}")


@dataclass(frozen=True)
class RnnParams:
    """Stochastic RNN f(x) = -x/tau + A sigma(x), g(x) = c I."""
    tau: float
    A: np.ndarray
    c: float
    gamma: Optional[float] = None
    sigmoid: str = "tanh"

    def __post_init__(self) -> None:
        validate_positive(self.tau, "tau")
        validate_positive(self.c, "c")
        object.__setattr__(self, "A", validate_square_matrix(self.A, name="A"))
        sig = get_sigmoid(self.sigmoid)
        gamma = sig.gamma if self.gamma is None else validate_positive(self.gamma, "gamma")
        if gamma < sig.gamma:
            raise ValidationError(
                f"gamma={gamma} is below the slope bound {sig.gamma} of sigmoid {self.sigmoid!r}"
            )
        object.__setattr__(self, "gamma", float(gamma))

    @property
    def dimension(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class LinearParams:
    """Linear SDE f(x) = A x, g(x) = G."""
    A: np.ndarray
    G: np.ndarray

    def __post_init__(self) -> None:
        A = validate_square_matrix(self.A, name="A")
        G = validate_square_matrix(self.G, A.shape[0], name="G")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "G", G)

    @property
    def dimension(self) -> int:
        return self.A.shape[0]

    @property
    def covariance_rate(self) -> np.ndarray:
        return self.G @ self.G.T


def build_rnn_system(p: RnnParams) -> ControlAffineSystem:
    """Build the stochastic RNN system with analytic Jacobian and lambda0 = lambda1 = c^2."""
    sig = get_sigmoid(p.sigmoid)
    d = p.dimension
    A = p.A.copy()
    A.setflags(write=False)
    inv_tau = 1.0 / p.tau

    def drift(x: np.ndarray) -> np.ndarray:
        return -inv_tau * x + sig.fn(x) @ A.T

    def jacobian(x: np.ndarray) -> np.ndarray:
        # A diag(sigma'(x)) scales column j by sigma'(x_j)
        return -inv_tau * np.eye(d) + A * sig.derivative(x)[..., None, :]

    G = p.c * np.eye(d)
    return ControlAffineSystem(
        dimension=d,
        drift=drift,
        diffusion=lambda x: np.broadcast_to(G, x.shape[:-1] + (d, d)),
        lambda0=p.c ** 2,
        lambda1=p.c ** 2,
        jacobian=jacobian,
        constant_diffusion=G,
        kind="rnn",
        params={"tau": p.tau, "A": A.tolist(), "c": p.c, "gamma": p.gamma, "sigmoid": p.sigmoid},
    )


def build_linear_system(p: LinearParams, tol: float = 1e-12) -> ControlAffineSystem:
    """Build f(x) = A x, g(x) = G with lambda0, lambda1 the extreme eigenvalues of G G^T.

    Raises:
        ValidationError: If G G^T is singular to within ``tol`` (relative)
    """
    eig = symmetric_eigenvalues(p.covariance_rate)
    lam0, lam1 = float(eig[0]), float(eig[-1])
    if lam0 <= tol * max(1.0, lam1):
        raise ValidationError(f"G G^T is singular (smallest eigenvalue {lam0:.3g}); ellipticity fails")

    d = p.dimension
    A = p.A.copy()
    G = p.G.copy()
    A.setflags(write=False)

    return ControlAffineSystem(
        dimension=d,
        drift=lambda x: x @ A.T,
        diffusion=lambda x: np.broadcast_to(G, x.shape[:-1] + (d, d)),
        lambda0=lam0,
        lambda1=lam1,
        jacobian=lambda x: np.broadcast_to(A, x.shape[:-1] + (d, d)).copy(),
        constant_diffusion=G,
        kind="linear",
        params={"A": A.tolist(), "G": G.tolist()},
    )


def build_expression_system(
    drift: list,
    diffusion: Optional[list] = None,
    lambda0: Optional[float] = None,
    lambda1: Optional[float] = None,
    box: Optional[BoxConfig] = None,
    n_samples: int = 256,
    seed: int = 0,
) -> ControlAffineSystem:
    """Build a system from expression strings in the variables x1..xd.

    The diffusion defaults to the identity. Ellipticity bounds not given
    explicitly are estimated by sampling a(x) over ``box`` (default [-1, 1]^d).
    """
    d = len(drift)
    drift_fn = compile_vector_expressions(drift, d)
    jacobian_fn = compile_jacobian(drift, d)
    if diffusion is None:
        diffusion = [["1" if i == j else "0" for j in range(d)] for i in range(d)]
    if len(diffusion) != d or any(len(row) != d for row in diffusion):
        raise ValidationError(f"diffusion must be a {d}x{d} array of expressions")
    diffusion_fn = compile_matrix_expressions(diffusion, d)

    constant = None
    if not any(referenced_variables(expr) for row in diffusion for expr in row):
        constant = np.array(diffusion_fn(np.zeros(d)), dtype=float)

    if lambda0 is None or lambda1 is None:
        lo, hi = (validate_box(box.lo, box.hi, d) if box is not None
                  else (-np.ones(d), np.ones(d)))
        rng = np.random.default_rng(seed)
        pts = rng.uniform(lo, hi, size=(n_samples, d))
        gx = diffusion_fn(pts)
        eig = symmetric_eigenvalues(gx @ np.swapaxes(gx, -1, -2))
        est0, est1 = float(eig[..., 0].min()), float(eig[..., -1].max())
        logger.info(f"Sampled ellipticity bounds over box: lambda0~{est0:.4g}, lambda1~{est1:.4g}")
        lambda0 = est0 if lambda0 is None else lambda0
        lambda1 = est1 if lambda1 is None else lambda1

    return ControlAffineSystem(
        dimension=d,
        drift=drift_fn,
        diffusion=diffusion_fn,
        lambda0=float(lambda0),
        lambda1=float(lambda1),
        jacobian=jacobian_fn,
        constant_diffusion=constant,
        kind="custom-expression",
        params={"drift": list(drift), "diffusion": [list(r) for r in diffusion]},
    )


def rnn_params_from_config(cfg: SystemConfig) -> RnnParams:
    """RnnParams from a system config (``kind == "rnn"``)."""
    if cfg.A is not None:
        A = np.asarray(cfg.A, dtype=float)
    else:
        A = np.zeros((cfg.dimension, cfg.dimension))
    return RnnParams(tau=cfg.tau, A=A, c=cfg.c, gamma=cfg.gamma, sigmoid=cfg.sigmoid)


def linear_params_from_config(cfg: SystemConfig) -> LinearParams:
    """LinearParams from a system config (``kind == "linear"``); missing A is 0, missing G is I."""
    d = cfg.dimension
    if d is None:
        d = len(cfg.A) if cfg.A is not None else len(cfg.G)
    A = np.asarray(cfg.A, dtype=float) if cfg.A is not None else np.zeros((d, d))
    G = np.asarray(cfg.G, dtype=float) if cfg.G is not None else np.eye(d)
    return LinearParams(A=A, G=G)


def build_system(cfg: SystemConfig, box: Optional[BoxConfig] = None, seed: int = 0) -> ControlAffineSystem:
    """Build any supported system from its configuration."""
    if cfg.kind == "linear":
        system = build_linear_system(linear_params_from_config(cfg))
    elif cfg.kind == "rnn":
        system = build_rnn_system(rnn_params_from_config(cfg))
    else:
        system = build_expression_system(
            cfg.drift, cfg.diffusion, cfg.lambda0, cfg.lambda1, box=box, seed=seed
        )

    if cfg.lambda0 is not None or cfg.lambda1 is not None:
        system = replace(
            system,
            lambda0=cfg.lambda0 if cfg.lambda0 is not None else system.lambda0,
            lambda1=cfg.lambda1 if cfg.lambda1 is not None else system.lambda1,
        )
    if cfg.dimension is not None and cfg.dimension != system.dimension:
        raise ValidationError(f"dimension {cfg.dimension} does not match matrices ({system.dimension})")
    return system
