"""
Minimum-action command.
"""

from typing import Any, Dict, Tuple

from ..control.grid import rollout
from ..control.solver import solve_min_action
from ..flow.integrators import default_steps
from ..flow.stability import s_t_along_trajectory
from .base import EXIT_NOT_CONVERGED, EXIT_OK, Command


class ActionCommand(Command):
    """Solve for I_T(x, y) and report it between the two analytic bounds."""

    name = "action"

    def run(self) -> Tuple[Dict[str, Any], int]:
        sys = self.system()
        cfg = self.config
        x, y = self.point("x"), self.point("y")
        opts = cfg.solver
        cert = solve_min_action(sys, x, y, cfg.T, opts.K, opts, seed=cfg.seed, threads=self.threads)
        path = rollout(sys, x, cert.control, opts.steps_per_interval)
        along = s_t_along_trajectory(sys, path, default_steps(cfg.T, cfg.integration.steps_per_unit_time),
                                     M=cert.M)
        self._write_csv("control", cert.control.csv_header(), cert.control.csv_rows())
        self._write_csv("path", path.csv_header(), path.csv_rows())
        exit_code = EXIT_OK if cert.converged else EXIT_NOT_CONVERGED
        return {"certificate": cert, "s_t_along_path": along, "endpoint": path.endpoint}, exit_code
