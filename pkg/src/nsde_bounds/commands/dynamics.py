"""
Regularity report for the stochastic RNN family.
"""

from typing import Any, Dict, Tuple

from ..control.bounds import lower_bound_I, upper_bound_I
from ..dynamics.regularity import (
    certified_M,
    check_jacobian,
    estimate_lipschitz,
    estimate_M,
    gershgorin_M_bound_uniform,
    network_constants,
    validate_ellipticity,
)
from ..flow.stability import s_t_bound, s_t_bound_displayed
from ..montecarlo.rng import STREAM_DIAGNOSTIC, derive_seed
from ..validators import ValidationError
from .base import EXIT_OK, Command


class RnnBoundsCommand(Command):
    """Gershgorin M(f), the S_T bounds it implies and, given x and y, the action bounds."""

    name = "rnn-bounds"

    def run(self) -> Tuple[Dict[str, Any], int]:
        sys = self.system()
        if sys.kind != "rnn":
            raise ValidationError("rnn-bounds needs a system of kind 'rnn'")
        cfg = self.config
        T = cfg.T
        M = certified_M(sys)
        ends = [self.point(f) for f in ("x", "y") if getattr(cfg, f) is not None]
        lo, hi = self.box(around=ends)
        n = cfg.integration.n_samples
        params = sys.params
        kappa, beta, m = network_constants(params["A"])
        result: Dict[str, Any] = {
            "system": sys.describe(),
            "M_gershgorin": M,
            "M_sampled": estimate_M(sys, lo, hi, n_samples=n, seed=cfg.seed),
            "contracting": M < 0,
            "M_uniform": gershgorin_M_bound_uniform(params["tau"], params["gamma"], kappa, beta, m),
            "network_constants": {"kappa": kappa, "beta": beta, "m": m},
            "drift_lipschitz_estimate": estimate_lipschitz(
                sys.drift, lo, hi, n_pairs=n, seed=derive_seed(cfg.seed, STREAM_DIAGNOSTIC)
            ),
            "s_t_bound": s_t_bound(M, T),
            "s_t_bound_displayed": s_t_bound_displayed(M, T),
            "ellipticity": validate_ellipticity(sys, lo, hi, n_samples=n, seed=cfg.seed),
            "jacobian_max_relative_error": check_jacobian(sys, lo, hi, seed=cfg.seed),
            "box": {"lo": lo, "hi": hi},
        }
        if len(ends) == 2:
            x, y = ends
            result["action_bounds"] = {
                "upper": upper_bound_I(sys, x, y, T, cfg.solver.quad_points),
                "lower": lower_bound_I(sys, x, y, T, s_t_bound(M, T)),
            }
        return result, EXIT_OK
