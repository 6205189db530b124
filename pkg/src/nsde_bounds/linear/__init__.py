"""
Closed-form oracle for linear SDEs: Gramian, exact action, exact density.
"""

from .oracle import (
    GramianResult,
    exact_action_linear,
    exact_density_linear,
    gramian,
    log_density_linear,
    optimal_control_linear,
)

__all__ = [
    "GramianResult",
    "exact_action_linear",
    "exact_density_linear",
    "gramian",
    "log_density_linear",
    "optimal_control_linear",
]
