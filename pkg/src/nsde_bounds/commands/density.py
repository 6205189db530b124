"""
Density commands: endpoint histograms and the density-versus-action fit.
"""

from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..density.histogram import estimate_density
from ..density.sheu import sheu_sandwich_check
from ..dynamics.families import linear_params_from_config
from ..linear.oracle import exact_density_linear, gramian
from .base import EXIT_OK, Command


class DensityCommand(Command):
    """Histogram of X_T from x; compared with the exact density for linear systems."""

    name = "density"

    def _box(self) -> Optional[Tuple[Any, Any]]:
        box = self.config.density.box or self.config.box
        return (box.lo, box.hi) if box is not None else None

    def run(self) -> Tuple[Dict[str, Any], int]:
        model = self.model()
        cfg = self.config
        dc = cfg.density
        x = self.point("x")
        hist = estimate_density(model, x, dc.n_samples, self._box(), dc.bins, cfg.seed,
                                cfg.monte_carlo.block_size, self.threads)
        result: Dict[str, Any] = {"histogram": hist}
        if model.system.kind == "linear" and model.dimension == 1:
            params = linear_params_from_config(cfg.system)
            gram = gramian(params, model.T)
            centers = hist.centers[0]
            exact = np.array([exact_density_linear(params, x, [c], model.T, gram=gram) for c in centers])
            result["l1_error"] = float(np.sum(np.abs(hist.density - exact)) * hist.widths[0])
        self._write_csv("density", hist.csv_header(), hist.csv_rows())
        return result, EXIT_OK


class SheuCheckCommand(DensityCommand):
    """Fit log p_hat = a - b I_T over probe points."""

    name = "sheu-check"

    def run(self) -> Tuple[Dict[str, Any], int]:
        model = self.model()
        cfg = self.config
        dc = cfg.density
        report = sheu_sandwich_check(
            model, self.point("x"), dc.probes, dc.n_samples, cfg.seed, cfg.solver, dc.bins,
            self._box(), dc.n_probes, dc.radius_range, cfg.monte_carlo.block_size, self.threads,
        )
        self._write_csv("sheu", report.csv_header(), report.csv_rows())
        return {"report": report}, EXIT_OK
