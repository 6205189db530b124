"""
Configuration models for nsde-bounds.

This module defines Pydantic models for configuration validation:
- Logging configuration
- System descriptions (linear, stochastic RNN, custom expressions)
- Integrator, action-solver, Monte Carlo and density settings
- The root run configuration consumed by every CLI subcommand

Matrices are stored row-major as nested lists.
"""

from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

Matrix = List[List[float]]
Vector = List[float]


class StrictModel(BaseModel):
    """Base for every config section; unknown keys are schema errors."""
    model_config = ConfigDict(extra="forbid")


class LoggingConfig(StrictModel):
    """Model for logging configuration."""
    level: str = "WARNING"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file: Optional[str] = None
    json_format: bool = False


class SystemConfig(StrictModel):
    """Description of a control-affine system.

    ``kind`` selects the family; only the fields relevant to that family are read.
    """

    kind: Literal["linear", "rnn", "custom-expression"] = "linear"
    dimension: Optional[int] = Field(default=None, ge=1)
    # linear: f(x) = A x, g(x) = G;  rnn: f(x) = -x/tau + A sigma(x), g(x) = c I
    A: Optional[Matrix] = None
    G: Optional[Matrix] = None
    tau: float = 1.0
    c: float = 1.0
    gamma: Optional[float] = None
    sigmoid: str = "tanh"
    # custom-expression: one string per drift component, d x d strings for g
    drift: Optional[List[str]] = None
    diffusion: Optional[List[List[str]]] = None
    lambda0: Optional[float] = None
    lambda1: Optional[float] = None

    @model_validator(mode="after")
    def _check_family_fields(self) -> "SystemConfig":
        if self.kind == "linear" and (self.A is None and self.G is None and self.dimension is None):
            raise ValueError("linear system needs A, G or dimension")
        if self.kind == "rnn" and self.A is None and self.dimension is None:
            raise ValueError("rnn system needs A or dimension")
        if self.kind == "custom-expression" and not self.drift:
            raise ValueError("custom-expression system needs drift expressions")
        return self


class BoxConfig(StrictModel):
    """Axis-aligned box [lo, hi]."""
    lo: Vector
    hi: Vector

    @model_validator(mode="after")
    def _check_bounds(self) -> "BoxConfig":
        if len(self.lo) != len(self.hi):
            raise ValueError("box lo and hi must have the same length")
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box must satisfy lo < hi in every coordinate")
        return self


class IntegrationConfig(StrictModel):
    """Fixed-step RK4 settings."""
    steps_per_unit_time: int = Field(default=1000, ge=1)
    n_probes: int = Field(default=16, ge=1)
    n_samples: int = Field(default=256, ge=1)


class SolverConfig(StrictModel):
    """Direct-transcription action solver settings."""
    K: int = Field(default=200, ge=2)
    steps_per_interval: int = Field(default=1, ge=1)
    endpoint_tol: Optional[float] = Field(default=None, gt=0)
    max_iterations: int = Field(default=400, ge=1)
    inner_tol: float = Field(default=1e-10, gt=0)
    rho_initial: float = Field(default=10.0, gt=0)
    rho_factor: float = Field(default=10.0, gt=1)
    rho_max: float = Field(default=1e10, gt=0)
    n_restarts: int = Field(default=0, ge=0)
    restart_scale: float = Field(default=0.5, ge=0)
    quad_points: int = Field(default=201, ge=2)


class SamplerConfig(StrictModel):
    """Distribution pi of initial states."""
    kind: Literal["gaussian", "box"] = "gaussian"
    mean: Optional[Vector] = None
    scale: float = Field(default=1.0, gt=0)
    box: Optional[BoxConfig] = None


class MonteCarloConfig(StrictModel):
    """Euler-Maruyama Monte Carlo settings."""
    L: int = Field(default=100, ge=1)
    N: int = Field(default=10000, ge=2)
    N_list: List[int] = Field(default_factory=lambda: [8, 16, 32, 64, 128, 256, 512, 1024])
    reps: int = Field(default=50, ge=2)
    n_outer: int = Field(default=64, ge=2)
    n_inner: int = Field(default=256, ge=2)
    n_points: int = Field(default=16, ge=1)
    block_size: int = Field(default=4096, ge=1)
    sampler: SamplerConfig = Field(default_factory=SamplerConfig)

    @model_validator(mode="after")
    def _check_n_list(self) -> "MonteCarloConfig":
        if any(b <= a for a, b in zip(self.N_list, self.N_list[1:])):
            raise ValueError("N_list must be strictly increasing")
        if any(n < 1 for n in self.N_list):
            raise ValueError("N_list entries must be positive")
        return self


class BoundConstants(StrictModel):
    """Constants k2, c2 of the variance bound; no closed forms exist, so the defaults are illustrative."""
    k2: float = Field(default=1.0, gt=0)
    c2: float = Field(default=1.0, gt=0)


class DensityConfig(StrictModel):
    """Histogram and probe settings for density estimation."""
    n_samples: int = Field(default=1_000_000, ge=1)
    bins: int = Field(default=64, ge=8)
    box: Optional[BoxConfig] = None
    probes: Optional[List[Vector]] = None
    n_probes: int = Field(default=20, ge=2)
    radius_range: List[float] = Field(default_factory=lambda: [0.5, 3.0])


class RunConfig(StrictModel):
    """Root configuration model.

    Problem fields are optional here; each subcommand checks the ones it needs.
    """
    system: Optional[SystemConfig] = None
    x: Optional[Vector] = None
    y: Optional[Vector] = None
    T: float = Field(default=1.0, gt=0)
    alpha: Optional[Vector] = None
    seed: int = Field(default=0, ge=0)
    threads: int = Field(default=1, ge=1)
    box: Optional[BoxConfig] = None
    probe_points: Optional[List[Vector]] = None
    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    integration: IntegrationConfig = Field(default_factory=IntegrationConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    monte_carlo: MonteCarloConfig = Field(default_factory=MonteCarloConfig)
    constants: BoundConstants = Field(default_factory=BoundConstants)
    density: DensityConfig = Field(default_factory=DensityConfig)
