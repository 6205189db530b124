"""
Monte Carlo commands: readout estimates, the 1/N rate experiment and V_pi(F).
"""

from typing import Any, Dict, Tuple

import numpy as np

from ..control.solver import resolve_stability
from ..dynamics.families import linear_params_from_config
from ..linear.oracle import gramian
from ..montecarlo.maurey import (
    flow_second_moment,
    linear_reference,
    linearized_gaussian,
    maurey_rate_experiment,
    vpi_upper_bound,
)
from ..montecarlo.simulate import em_endpoints, estimate_F, estimate_Vpi
from .base import EXIT_OK, Command


class SimulateCommand(Command):
    """Estimate F(x) = E<alpha, X_T> from N Euler-Maruyama paths."""

    name = "simulate"

    def run(self) -> Tuple[Dict[str, Any], int]:
        model = self.model()
        cfg = self.config
        mc = cfg.monte_carlo
        x = self.point("x")
        estimate = estimate_F(model, x, mc.N, cfg.seed, mc.block_size, self.threads)
        result: Dict[str, Any] = {
            "model": model.describe(),
            "x": x,
            "estimate": estimate,
            "linearized": linearized_gaussian(model, x),
        }
        if model.system.kind == "linear":
            result["reference_F"] = float(linear_reference(model)(x[None, :])[0])
        if self.csv_dir:
            # same streams as the estimate, so the table matches it
            ends = em_endpoints(model, x, mc.N, cfg.seed, block_size=mc.block_size, threads=self.threads)
            d = model.dimension
            self._write_csv("endpoints", [f"x_{i + 1}" for i in range(d)] + ["readout"],
                            [list(e) + [float(z)] for e, z in zip(ends, model.readout(ends))])
        return result, EXIT_OK


class MaureyCommand(Command):
    """MSE of the N-sample estimate over N_list with the fitted log-log slope."""

    name = "maurey"

    def run(self) -> Tuple[Dict[str, Any], int]:
        model = self.model()
        cfg = self.config
        mc = cfg.monte_carlo
        result = maurey_rate_experiment(model, self.sampler(), mc.N_list, mc.reps, cfg.seed,
                                        n_points=mc.n_points, block_size=mc.block_size,
                                        threads=self.threads)
        self._write_csv("maurey", result.csv_header(), result.csv_rows())
        return {"experiment": result}, EXIT_OK


class VpiCommand(Command):
    """Monte Carlo V_pi(F) next to the evaluated upper bound."""

    name = "vpi"

    def run(self) -> Tuple[Dict[str, Any], int]:
        model = self.model()
        cfg = self.config
        mc = cfg.monte_carlo
        sampler = self.sampler()
        estimate = estimate_Vpi(model, sampler, mc.n_outer, mc.n_inner, cfg.seed, mc.block_size, self.threads)

        centre = np.zeros(model.dimension)
        S, M, certified = resolve_stability(model.system, centre, centre, model.T, seed=cfg.seed)
        moment = flow_second_moment(model, sampler, max(mc.n_outer, 2), cfg.seed)
        bound = vpi_upper_bound(model, S, moment.mean, cfg.constants.k2, cfg.constants.c2)
        result: Dict[str, Any] = {
            "estimate": estimate,
            "upper_bound": bound,
            "s_t": S,
            "M": M,
            "s_t_certified": certified,
            "flow_second_moment": moment,
            "constants": {"k2": cfg.constants.k2, "c2": cfg.constants.c2, "illustrative": True},
        }
        if model.system.kind == "linear":
            gram = gramian(linear_params_from_config(cfg.system), model.T)
            result["exact_V"] = float(model.alpha @ gram.W @ model.alpha)
        self.logger.info(f"V_pi estimate {estimate.mean:.6g} +- {estimate.se:.2g}, bound {bound:.6g}")
        if estimate.mean > bound:
            self.logger.warning("V_pi estimate exceeds the bound evaluated with the given constants")
        self._write_csv("vpi", ["quantity", "value"], [["estimate", estimate.mean], ["se", estimate.se],
                                                      ["upper_bound", bound]])
        return result, EXIT_OK
