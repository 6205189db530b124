"""
Configuration loading utilities for nsde-bounds.

This module handles loading and validation of run configuration:
- JSON configuration file loading
- Environment variable handling (``.env`` files via python-dotenv)
- Configuration validation using Pydantic models
- Config hashing for reproducibility envelopes
"""

import hashlib
import json
import os
from typing import Optional

from dotenv import load_dotenv
from pydantic import ValidationError as PydanticValidationError

from .models import RunConfig

CONFIG_ENV_VAR = "NSDE_BOUNDS_CONFIG"
THREADS_ENV_VAR = "NSDE_BOUNDS_THREADS"


def load_config(config_path: Optional[str] = None) -> RunConfig:
    """Load and validate configuration from JSON file or environment.

    Args:
        config_path: Path to the JSON configuration file; falls back to
            ``$NSDE_BOUNDS_CONFIG`` when omitted

    Returns:
        RunConfig object containing validated configuration

    Raises:
        ValueError: If the file is not valid JSON or does not match the schema
    """
    load_dotenv()
    config_path = config_path or os.getenv(CONFIG_ENV_VAR)

    if config_path and os.path.exists(config_path):
        try:
            with open(config_path) as f:
                config_data = json.load(f)
        except json.JSONDecodeError as e:
            raise ValueError(f"Invalid JSON in config file: {e}")
        return config_from_dict(config_data)

    if config_path:
        raise ValueError(f"Config file not found: {config_path}")

    return RunConfig()


def config_from_dict(config_data: dict) -> RunConfig:
    """Validate a decoded JSON document into a RunConfig.

    Raises:
        ValueError: If the document does not match the schema
    """
    try:
        return RunConfig(**config_data)
    except PydanticValidationError as e:
        raise ValueError(f"Invalid configuration: {e}")


def env_threads() -> Optional[int]:
    """Thread count from ``$NSDE_BOUNDS_THREADS`` if set and valid."""
    load_dotenv()
    raw = os.getenv(THREADS_ENV_VAR)
    if raw is None:
        return None
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}")
    if value < 1:
        raise ValueError(f"{THREADS_ENV_VAR} must be positive, got {value}")
    return value


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the canonical JSON form of the resolved config."""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
