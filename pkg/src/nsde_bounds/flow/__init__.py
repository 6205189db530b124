"""
Autonomous flow, variational equation and the stability constant S_T(f).
"""

from .integrators import (
    Trajectory,
    default_steps,
    flow,
    flow_jacobian,
    flow_map,
    integrate_flow,
    rk4_step,
)
from .stability import (
    CoppelReport,
    StabilityEstimate,
    coppel_check,
    default_probe_points,
    s_t_along_trajectory,
    s_t_bound,
    s_t_bound_displayed,
    s_t_numeric,
)

__all__ = [
    "CoppelReport",
    "StabilityEstimate",
    "Trajectory",
    "coppel_check",
    "default_probe_points",
    "default_steps",
    "flow",
    "flow_jacobian",
    "flow_map",
    "integrate_flow",
    "rk4_step",
    "s_t_along_trajectory",
    "s_t_bound",
    "s_t_bound_displayed",
    "s_t_numeric",
]
