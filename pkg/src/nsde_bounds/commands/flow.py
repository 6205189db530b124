"""
Commands for the autonomous flow and the stability constant S_T(f).
"""

from typing import Any, Dict, Tuple

import numpy as np

from ..dynamics.regularity import certified_M, estimate_M, spectral_norm
from ..flow.integrators import default_steps, flow_jacobian
from ..flow.stability import coppel_check, default_probe_points, s_t_numeric
from .base import EXIT_OK, Command


class FlowCommand(Command):
    """phi_T(x) with its Jacobian, plus the Coppel comparison when M(f) is certified."""

    name = "flow"

    def run(self) -> Tuple[Dict[str, Any], int]:
        sys = self.system()
        cfg = self.config
        x = self.point("x")
        steps = default_steps(cfg.T, cfg.integration.steps_per_unit_time)
        traj = flow_jacobian(sys, x, cfg.T, steps)
        self._write_csv("trajectory", traj.csv_header(), traj.csv_rows())
        M = certified_M(sys)
        return {
            "x": x,
            "T": cfg.T,
            "steps": steps,
            "endpoint": traj.endpoint,
            "jacobian": traj.jacobians[-1],
            "jacobian_norm": spectral_norm(traj.jacobians[-1]),
            "coppel": coppel_check(sys, x, cfg.T, steps, M),
        }, EXIT_OK


class StabilityCommand(Command):
    """Sampled-sup estimate of S_T(f) against the closed-form bound."""

    name = "stability"

    def run(self) -> Tuple[Dict[str, Any], int]:
        sys = self.system()
        cfg = self.config
        extra = [self.point("x")] if cfg.x is not None else None
        lo, hi = self.box(around=extra)
        if cfg.probe_points is not None:
            probes = np.asarray(cfg.probe_points, dtype=float)
        else:
            probes = default_probe_points(lo, hi, cfg.integration.n_probes, cfg.seed, extra)

        M = certified_M(sys)
        certified = M is not None
        if M is None:
            M = estimate_M(sys, lo, hi, n_samples=cfg.integration.n_samples, seed=cfg.seed,
                           extra_points=probes)
            self.logger.warning("M(f) is a sampled estimate; the bound below is not certified")
        steps = default_steps(cfg.T, cfg.integration.steps_per_unit_time)
        estimate = s_t_numeric(sys, cfg.T, probes, steps, M)
        self._write_csv(
            "stability_integrand",
            ["t", "sup_norm_sq"],
            [[float(t), float(v)] for t, v in zip(np.linspace(0.0, cfg.T, steps + 1), estimate.integrand)],
        )
        return {"estimate": estimate, "M_certified": certified, "probe_points": probes}, EXIT_OK
