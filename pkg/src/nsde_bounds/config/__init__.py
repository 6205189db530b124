"""
Configuration package: pydantic models and the JSON loader.
"""

from .loader import config_from_dict, config_hash, env_threads, load_config
from .models import (
    BoundConstants,
    BoxConfig,
    DensityConfig,
    IntegrationConfig,
    LoggingConfig,
    MonteCarloConfig,
    RunConfig,
    SamplerConfig,
    SolverConfig,
    SystemConfig,
)

__all__ = [
    "BoundConstants",
    "BoxConfig",
    "DensityConfig",
    "IntegrationConfig",
    "LoggingConfig",
    "MonteCarloConfig",
    "RunConfig",
    "SamplerConfig",
    "SolverConfig",
    "SystemConfig",
    "config_from_dict",
    "config_hash",
    "env_threads",
    "load_config",
]
