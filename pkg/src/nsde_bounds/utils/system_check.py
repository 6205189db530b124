"""
System check utilities for nsde-bounds.

This module reports the numerical environment (platform, Python, numpy and
scipy versions, CPU count) and resolves the worker thread count.
"""

import platform
from typing import Any, Dict, Optional

import numpy as np
import psutil
import scipy

from ..config.loader import env_threads


def get_system_info() -> Dict[str, Any]:
    """Get basic system information.

    Returns:
        Dictionary containing system information
    """
    try:
        cpu_count = psutil.cpu_count(logical=True)
    except Exception:
        cpu_count = None

    try:
        memory_total = psutil.virtual_memory().total
    except Exception:
        memory_total = None

    return {
        "platform": platform.system(),
        "python_version": platform.python_version(),
        "architecture": platform.machine(),
        "numpy_version": np.__version__,
        "scipy_version": scipy.__version__,
        "cpu_count": cpu_count,
        "memory_total": memory_total,
    }


def resolve_threads(flag: Optional[int] = None, config_threads: Optional[int] = None) -> int:
    """Thread count by precedence: command-line flag, environment, config, then 1.

    Raises:
        ValueError: If the environment variable is set to something invalid
    """
    if flag is not None:
        if flag < 1:
            raise ValueError(f"--threads must be positive, got {flag}")
        return flag
    from_env = env_threads()
    if from_env is not None:
        return from_env
    if config_threads is not None:
        return config_threads
    return 1


def cap_threads(threads: int) -> int:
    """Limit the thread count to the number of logical CPUs when it is known."""
    try:
        cpus = psutil.cpu_count(logical=True)
    except Exception:
        cpus = None
    return max(1, min(threads, cpus)) if cpus else threads
