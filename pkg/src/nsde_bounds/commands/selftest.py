"""
Reduced oracle suite run by ``nsde-bounds selftest``.

Each check compares a numerical routine with a closed form or a certified
bound on a few seeded problems and reports the worst discrepancy.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Tuple

import numpy as np

from ..config.models import SolverConfig
from ..control.grid import ControlGrid, penalty_objective
from ..control.solver import solve_min_action
from ..dynamics.families import LinearParams, RnnParams, build_linear_system, build_rnn_system
from ..dynamics.regularity import certified_M
from ..flow.integrators import default_steps
from ..flow.stability import coppel_check, default_probe_points, s_t_numeric
from ..linear.oracle import exact_action_linear
from ..montecarlo.maurey import maurey_rate_experiment
from ..montecarlo.simulate import GaussianSampler, NeuralSdeModel
from .base import EXIT_NUMERIC, EXIT_OK, Command


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng([seed, *key])


def _random_linear(rng: np.random.Generator, d: int) -> LinearParams:
    return LinearParams(A=0.5 * rng.standard_normal((d, d)),
                        G=np.eye(d) + 0.2 * rng.standard_normal((d, d)))


def _random_rnn(rng: np.random.Generator, d: int) -> RnnParams:
    return RnnParams(tau=1.0, A=0.8 * rng.standard_normal((d, d)), c=1.0)


def check_linear_equivalence(seed: int) -> CheckResult:
    opts = SolverConfig(K=100)
    worst = 0.0
    for i, d in enumerate((1, 2, 3)):
        rng = _rng(seed, 1, i)
        params = _random_linear(rng, d)
        x, y = rng.standard_normal(d), rng.standard_normal(d)
        exact = exact_action_linear(params, x, y, 1.0)
        cert = solve_min_action(build_linear_system(params), x, y, 1.0, opts.K, opts, seed=seed)
        worst = max(worst, abs(cert.value - exact) / (1.0 + exact))
    return CheckResult("linear-oracle action", worst <= 1e-2, worst, 1e-2, "relative to 1 + exact, K=100")


def check_trivial_sandwich(seed: int) -> CheckResult:
    opts = SolverConfig(K=20)
    worst = 0.0
    for d in (1, 2, 3):
        rng = _rng(seed, 2, d)
        sys = build_linear_system(LinearParams(A=np.zeros((d, d)), G=np.eye(d)))
        x, y = rng.standard_normal(d), rng.standard_normal(d)
        exact = 0.5 * float((y - x) @ (y - x))
        cert = solve_min_action(sys, x, y, 1.0, opts.K, opts, seed=seed)
        for v in (cert.value, cert.lower_bound, cert.upper_bound):
            worst = max(worst, abs(v - exact) / max(exact, 1e-12))
    return CheckResult("trivial sandwich", worst <= 1e-4, worst, 1e-4, "f=0, g=I, d=1..3")


def check_coppel(seed: int) -> CheckResult:
    worst = 0.0
    T = 1.0
    steps = default_steps(T)
    for i in range(4):
        rng = _rng(seed, 3, i)
        d = 1 + i % 3
        params = _random_linear(rng, d) if i % 2 == 0 else _random_rnn(rng, d)
        sys = build_linear_system(params) if i % 2 == 0 else build_rnn_system(params)
        M = certified_M(sys)
        x = rng.standard_normal(d)
        report = coppel_check(sys, x, T, steps, M)
        worst = max(worst, report.max_violation)
        probes = default_probe_points(-2 * np.ones(d), 2 * np.ones(d), 8, seed=seed)
        estimate = s_t_numeric(sys, T, probes, steps, M)
        worst = max(worst, max(0.0, estimate.value / estimate.bound - 1.0))
    return CheckResult("coppel / S_T bound", worst <= 1e-6, worst, 1e-6, "relative violation")


def check_adjoint_gradient(seed: int) -> CheckResult:
    rng = _rng(seed, 4)
    d, K, T, rho = 2, 10, 1.0, 100.0
    sys = build_rnn_system(_random_rnn(rng, d))
    x, y = rng.standard_normal(d), rng.standard_normal(d)
    U = rng.standard_normal((K, d))
    _, grad = penalty_objective(sys, x, y, ControlGrid(T=T, values=U), rho)
    scale = max(float(np.max(np.abs(grad))), 1e-8)
    h = 1e-5
    worst = 0.0
    for flat in rng.choice(K * d, size=5, replace=False):
        k, i = divmod(int(flat), d)
        up, down = U.copy(), U.copy()
        up[k, i] += h
        down[k, i] -= h
        fd = (penalty_objective(sys, x, y, ControlGrid(T=T, values=up), rho)[0]
              - penalty_objective(sys, x, y, ControlGrid(T=T, values=down), rho)[0]) / (2 * h)
        worst = max(worst, abs(fd - grad[k, i]) / scale)
    return CheckResult("adjoint gradient", worst <= 1e-5, worst, 1e-5, "vs central differences")


def check_maurey_slope(seed: int) -> CheckResult:
    sys = build_linear_system(LinearParams(A=-np.eye(1), G=np.eye(1)))
    model = NeuralSdeModel(system=sys, alpha=np.ones(1), T=1.0, L=50)
    sampler = GaussianSampler(mean=np.zeros(1))
    result = maurey_rate_experiment(model, sampler, [8, 16, 32, 64, 128, 256], reps=20, seed=seed,
                                    n_points=8)
    slope = result.slope if result.slope is not None else float("nan")
    error = abs(slope + 1.0)
    return CheckResult("maurey 1/N rate", bool(error <= 0.15), slope, 0.15, "log-log slope, target -1")


CHECKS: List[Callable[[int], CheckResult]] = [
    check_linear_equivalence,
    check_trivial_sandwich,
    check_coppel,
    check_adjoint_gradient,
    check_maurey_slope,
]


class SelftestCommand(Command):
    """Run the reduced oracle suite; exits nonzero when a check fails."""

    name = "selftest"

    def run(self) -> Tuple[Dict[str, Any], int]:
        results = []
        for check in CHECKS:
            outcome = check(self.config.seed)
            level = "info" if outcome.passed else "error"
            getattr(self.logger, level)(f"{outcome.name}: {outcome.value:.3g} (tol {outcome.tolerance:g})")
            results.append(outcome)
        passed = all(r.passed for r in results)
        self._write_csv("selftest", ["check", "passed", "value", "tolerance"],
                        [[r.name, r.passed, r.value, r.tolerance] for r in results])
        return {"passed": passed, "checks": results}, EXIT_OK if passed else EXIT_NUMERIC
