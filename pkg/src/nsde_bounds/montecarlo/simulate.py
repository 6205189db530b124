"""
Euler-Maruyama simulation of the neural SDE dX = f(X) dt + g(X) dW and
Monte Carlo estimation of F(x) = E[<alpha, X_T> | X_0 = x].

Samples are produced in fixed-size blocks; every block draws its noise from
its own counter-derived stream, so the output depends on the seed and the
block size only.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Protocol, Tuple

import numpy as np

from ..config.models import SamplerConfig
from ..core.exceptions import IntegrationError
from ..core.logging import get_structured_logger
from ..dynamics.system import ControlAffineSystem
from ..validators import ValidationError, validate_box, validate_count, validate_positive, validate_vector
from .rng import STREAM_EULER, STREAM_PI, blocks, derive_generator

logger = logging.getLogger("nsde-bounds.montecarlo")
slog = get_structured_logger("montecarlo.simulate")

DEFAULT_BLOCK_SIZE = 4096


@dataclass(frozen=True)
class NeuralSdeModel:
    """A system, a linear readout alpha, a horizon T and an Euler step count L."""

    system: ControlAffineSystem
    alpha: np.ndarray
    T: float
    L: int

    def __post_init__(self) -> None:
        alpha = validate_vector(self.alpha, self.system.dimension, "alpha")
        alpha.setflags(write=False)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "T", validate_positive(self.T, "T"))
        object.__setattr__(self, "L", validate_count(self.L, 1, "L"))

    @property
    def dimension(self) -> int:
        return self.system.dimension

    @property
    def step(self) -> float:
        return self.T / self.L

    def readout(self, points: np.ndarray) -> np.ndarray:
        """<alpha, x> for a batch of points."""
        return np.asarray(points, dtype=float) @ self.alpha

    def describe(self) -> dict:
        return {"alpha": self.alpha.tolist(), "T": self.T, "L": self.L, "system": self.system.describe()}


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its unbiased variance."""

    mean: float
    variance: float
    n: int
    seed: int

    @property
    def se(self) -> float:
        return float(np.sqrt(self.variance / self.n))

    def to_dict(self) -> dict:
        return {"mean": self.mean, "variance": self.variance, "n": self.n, "seed": self.seed, "se": self.se}


def summarize(values: np.ndarray, seed: int) -> McEstimate:
    """Mean and unbiased variance of a sample; numpy's pairwise summation keeps the order fixed."""
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    mean = float(np.mean(values))
    variance = float(np.var(values, ddof=1)) if n > 1 else 0.0
    return McEstimate(mean=mean, variance=max(variance, 0.0), n=n, seed=seed)


def _euler_block(model: NeuralSdeModel, x0: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    sys = model.system
    h = model.step
    sqrt_h = np.sqrt(h)
    x = np.array(x0, dtype=float)
    for step in range(model.L):
        dw = rng.standard_normal(x.shape)
        x = x + h * sys.f(x) + sqrt_h * np.einsum("...ij,...j->...i", sys.g(x), dw)
        if not np.all(np.isfinite(x)):
            t = (step + 1) * h
            raise IntegrationError(f"Euler-Maruyama path blew up at t={t:.6g}", time=t)
    return x


def simulate_block(model: NeuralSdeModel, starts: np.ndarray, seed: int, block: int,
                   key: Tuple[int, ...] = ()) -> np.ndarray:
    """Endpoints of one block of paths on the stream (seed, euler, key..., block)."""
    return _euler_block(model, starts, derive_generator(seed, STREAM_EULER, *key, block))


def em_endpoints(model: NeuralSdeModel, x, n: Optional[int] = None, seed: int = 0,
                 key: Tuple[int, ...] = (), block_size: int = DEFAULT_BLOCK_SIZE,
                 threads: int = 1) -> np.ndarray:
    """Euler-Maruyama endpoints X_T for a batch of starting points.

    Args:
        model: SDE model
        x: One starting point (d,) repeated ``n`` times, or a batch (n, d)
        n: Number of paths when ``x`` is a single point
        seed: Base seed
        key: Extra stream counters separating independent experiments on one seed
        block_size: Paths per noise stream
        threads: Worker threads; blocks write disjoint slices so the result is unchanged

    Returns:
        Endpoints, shape (n, d)

    Raises:
        IntegrationError: If any path becomes non-finite
    """
    d = model.dimension
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        validate_vector(arr, d, "x")
        count = validate_count(n if n is not None else 1, 1, "n")
        starts = np.broadcast_to(arr, (count, d))
    elif arr.ndim == 2 and arr.shape[1] == d:
        starts = arr
        count = arr.shape[0]
        if n is not None and n != count:
            raise ValidationError(f"n={n} does not match {count} starting points")
    else:
        raise ValidationError(f"starting points must have shape (d,) or (n, d) with d={d}, got {arr.shape}")
    block_size = validate_count(block_size, 1, "block_size")

    out = np.empty((count, d))

    def run(block: Tuple[int, int, int]) -> None:
        b, start, stop = block
        out[start:stop] = simulate_block(model, starts[start:stop], seed, b, key)

    work = list(blocks(count, block_size))
    if threads > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, work))
    else:
        for block in work:
            run(block)
    return out


def em_endpoint(model: NeuralSdeModel, x, seed: int) -> np.ndarray:
    """A single Euler-Maruyama endpoint; a deterministic function of (model, x, seed)."""
    return em_endpoints(model, validate_vector(x, model.dimension, "x"), 1, seed)[0]


def estimate_F(model: NeuralSdeModel, x, N: int, seed: int = 0,
               block_size: int = DEFAULT_BLOCK_SIZE, threads: int = 1,
               key: Tuple[int, ...] = ()) -> McEstimate:
    """F_N(x) = N^{-1} sum_i <alpha, X_T^{x,i}> over N counter-derived paths."""
    N = validate_count(N, 2, "N")
    x = validate_vector(x, model.dimension, "x")
    endpoints = em_endpoints(model, x, N, seed, key=key, block_size=block_size, threads=threads)
    estimate = summarize(model.readout(endpoints), seed)
    slog.debug("estimate_F", N=N, seed=seed, mean=estimate.mean, se=estimate.se)
    return estimate


class Sampler(Protocol):
    """Distribution pi of starting points."""

    dimension: int

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray: ...

    def describe(self) -> dict: ...


@dataclass(frozen=True)
class GaussianSampler:
    """N(mean, scale^2 I)."""

    mean: np.ndarray
    scale: float = 1.0

    @property
    def dimension(self) -> int:
        return int(np.asarray(self.mean).shape[0])

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        mean = np.asarray(self.mean, dtype=float)
        return mean + self.scale * rng.standard_normal((n, mean.shape[0]))

    def second_moment(self) -> float:
        """E|X|^2 under the sampler."""
        mean = np.asarray(self.mean, dtype=float)
        return float(mean @ mean + self.dimension * self.scale ** 2)

    def describe(self) -> dict:
        return {"kind": "gaussian", "mean": np.asarray(self.mean).tolist(), "scale": self.scale}


@dataclass(frozen=True)
class BoxSampler:
    """Uniform on [lo, hi]."""

    lo: np.ndarray
    hi: np.ndarray

    @property
    def dimension(self) -> int:
        return int(np.asarray(self.lo).shape[0])

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lo, self.hi, size=(n, self.dimension))

    def second_moment(self) -> float:
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        return float(np.sum((lo ** 2 + lo * hi + hi ** 2) / 3.0))

    def describe(self) -> dict:
        return {"kind": "box", "lo": np.asarray(self.lo).tolist(), "hi": np.asarray(self.hi).tolist()}


def sampler_from_config(cfg: SamplerConfig, dimension: int) -> Sampler:
    """Build pi from its configuration; the Gaussian defaults to mean 0."""
    if cfg.kind == "box":
        if cfg.box is None:
            raise ValidationError("box sampler needs monte_carlo.sampler.box")
        lo, hi = validate_box(cfg.box.lo, cfg.box.hi, dimension)
        return BoxSampler(lo=lo, hi=hi)
    mean = np.zeros(dimension) if cfg.mean is None else validate_vector(cfg.mean, dimension, "sampler.mean")
    return GaussianSampler(mean=mean, scale=validate_positive(cfg.scale, "sampler.scale"))


def sample_pi(sampler: Sampler, n: int, seed: int, *key: int) -> np.ndarray:
    """n starting points from pi on the stream (seed, pi, key...)."""
    return sampler.sample(validate_count(n, 1, "n"), derive_generator(seed, STREAM_PI, *key))


def estimate_Vpi(model: NeuralSdeModel, sampler: Sampler, n_outer: int, n_inner: int,
                 seed: int = 0, block_size: int = DEFAULT_BLOCK_SIZE, threads: int = 1) -> McEstimate:
    """V_pi(F) = int var[<alpha, X_T> | X_0 = x] pi(dx).

    Averages the unbiased inner variance of n_inner paths over n_outer points
    drawn from pi, which is unbiased for V_pi(F). The returned variance and
    SE describe the spread of the inner variances across outer points.
    """
    n_outer = validate_count(n_outer, 2, "n_outer")
    n_inner = validate_count(n_inner, 2, "n_inner")
    if sampler.dimension != model.dimension:
        raise ValidationError(f"sampler dimension {sampler.dimension} != system dimension {model.dimension}")
    points = sample_pi(sampler, n_outer, seed)
    starts = np.repeat(points, n_inner, axis=0)
    endpoints = em_endpoints(model, starts, seed=seed, key=(STREAM_PI,), block_size=block_size,
                             threads=threads)
    z = model.readout(endpoints).reshape(n_outer, n_inner)
    inner = np.var(z, axis=1, ddof=1)
    estimate = summarize(inner, seed)
    slog.info("estimate_Vpi", n_outer=n_outer, n_inner=n_inner, seed=seed, mean=estimate.mean, se=estimate.se)
    return estimate
