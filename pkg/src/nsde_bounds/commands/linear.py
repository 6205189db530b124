"""
Closed-form linear oracle command.
"""

from typing import Any, Dict, Tuple

import numpy as np

from ..dynamics.families import linear_params_from_config
from ..flow.integrators import default_steps
from ..linear.oracle import (
    exact_action_linear,
    exact_density_linear,
    gramian,
    log_density_linear,
    optimal_control_linear,
)
from ..validators import ValidationError
from .base import EXIT_OK, Command


class GramianCommand(Command):
    """W(T) for a linear system, and the exact action and density when x and y are given."""

    name = "gramian"

    def run(self) -> Tuple[Dict[str, Any], int]:
        cfg = self.config
        if cfg.system is None or cfg.system.kind != "linear":
            raise ValidationError("gramian needs a system of kind 'linear'")
        params = linear_params_from_config(cfg.system)
        steps = default_steps(cfg.T, cfg.integration.steps_per_unit_time)
        gram = gramian(params, cfg.T, steps)
        if gram.ill_conditioned:
            self.logger.warning(f"W(T) is ill-conditioned (condition {gram.condition:.3g})")
        result: Dict[str, Any] = {"gramian": gram}
        if cfg.x is not None and cfg.y is not None:
            x, y = self.point("x"), self.point("y")
            result["exact_action"] = exact_action_linear(params, x, y, cfg.T, gram=gram)
            result["log_density"] = log_density_linear(params, x, y, cfg.T, gram=gram)
            result["exact_density"] = exact_density_linear(params, x, y, cfg.T, gram=gram)

            # minimum-energy control on the solver's grid, for comparison with `action`
            times = np.linspace(0.0, cfg.T, cfg.solver.K + 1)
            control = optimal_control_linear(params, x, y, cfg.T, times, gram=gram)
            header = ["t"] + [f"u_{i + 1}" for i in range(params.dimension)]
            self._write_csv("optimal_control", header,
                            [[t, *u] for t, u in zip(times.tolist(), control.tolist())])
        return result, EXIT_OK
