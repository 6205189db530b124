"""
Minimum-action problem: control grids, rollouts, analytic bounds and the solver.
"""

from .bounds import fbl_control, lower_bound_I, stability_value, upper_bound_I
from .grid import ControlGrid, RolloutTape, backward, forward, penalty_objective, rollout
from .solver import ActionCertificate, resolve_stability, solve_min_action

__all__ = [
    "ActionCertificate",
    "ControlGrid",
    "RolloutTape",
    "backward",
    "fbl_control",
    "forward",
    "lower_bound_I",
    "penalty_objective",
    "resolve_stability",
    "rollout",
    "solve_min_action",
    "stability_value",
    "upper_bound_I",
]
