"""
Empirical check that log p_T(x, y) falls affinely in the minimum action I_T(x, y).

For each probe y the histogram bin containing y gives log p_hat; the action
is solved at the bin centre. A least-squares fit log p_hat = a - b I_T should
have b > 0 and a strong negative correlation. Nothing is claimed about the
constants of the two-sided density bound.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import linregress, pearsonr

from ..config.models import SolverConfig
from ..control.solver import solve_min_action
from ..core.logging import get_structured_logger
from ..montecarlo.maurey import linearized_gaussian
from ..montecarlo.simulate import DEFAULT_BLOCK_SIZE, NeuralSdeModel
from ..validators import ValidationError, validate_count, validate_vector
from .histogram import DensityHistogram, estimate_density

logger = logging.getLogger("nsde-bounds.density")
slog = get_structured_logger("density.sheu")

MIN_BIN_COUNT = 50
GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


@dataclass(frozen=True)
class ProbeResult:
    y: List[float]
    y_bin: List[float]
    count: int
    log_density: float
    log_density_se: float
    action: float
    converged: bool
    residual: float = 0.0


@dataclass(frozen=True)
class ExcludedProbe:
    y: List[float]
    reason: str


@dataclass
class SheuReport:
    """Fit of log p_hat against I_T over the usable probes."""

    probes: List[ProbeResult]
    excluded: List[ExcludedProbe]
    slope: float
    intercept: float
    slope_stderr: float
    pearson: float
    histogram: DensityHistogram
    notes: List[str] = field(default_factory=list)

    @property
    def b(self) -> float:
        """Decay rate b in log p_hat = a - b I_T."""
        return -self.slope

    def to_dict(self) -> dict:
        return {
            "b": self.b,
            "a": self.intercept,
            "b_stderr": self.slope_stderr,
            "pearson": self.pearson,
            "n_probes": len(self.probes),
            "probes": [p.__dict__ for p in self.probes],
            "excluded": [e.__dict__ for e in self.excluded],
            "histogram": self.histogram.to_dict(),
            "notes": self.notes,
        }

    def csv_header(self) -> List[str]:
        d = self.histogram.dimension
        return [f"y_{i + 1}" for i in range(d)] + ["log_p_hat", "I_T", "residual"]

    def csv_rows(self) -> List[list]:
        return [p.y_bin + [p.log_density, p.action, p.residual] for p in self.probes]


def default_probes(model: NeuralSdeModel, x, n_probes: int = 20,
                   radius_range: Sequence[float] = (0.5, 3.0),
                   spread: Optional[np.ndarray] = None) -> np.ndarray:
    """Probe points on rays from phi_T(x) at radii spanning radius_range standard deviations.

    The spread defaults to the linearized endpoint standard deviations. In
    d = 1 the probes alternate sides of phi_T(x); in d = 2 the ray angles
    advance by the golden angle.
    """
    n_probes = validate_count(n_probes, 2, "n_probes")
    r0, r1 = (float(r) for r in radius_range)
    if not 0 < r0 < r1:
        raise ValidationError(f"radius_range must satisfy 0 < lo < hi, got {list(radius_range)}")
    picture = linearized_gaussian(model, x)
    sigma = np.sqrt(np.diag(picture.covariance)) if spread is None else np.asarray(spread, dtype=float)
    radii = np.linspace(r0, r1, n_probes)
    d = model.dimension
    if d == 1:
        directions = np.where(np.arange(n_probes) % 2 == 0, 1.0, -1.0)[:, None]
    elif d == 2:
        angles = GOLDEN_ANGLE * np.arange(n_probes)
        directions = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    else:
        raise ValidationError(f"probes are defined for d <= 2, got d={d}")
    return picture.mean + radii[:, None] * directions * sigma


def sheu_sandwich_check(model: NeuralSdeModel, x, probe_ys: Optional[Sequence[Sequence[float]]] = None,
                        n_samples: int = 1_000_000, seed: int = 0,
                        action_opts: Optional[SolverConfig] = None, bins: int = 64,
                        box: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
                        n_probes: int = 20, radius_range: Sequence[float] = (0.5, 3.0),
                        block_size: int = DEFAULT_BLOCK_SIZE, threads: int = 1) -> SheuReport:
    """Fit log p_hat_T(x, y) = a - b I_T(x, y) over probe points.

    Probes landing outside the box or in an empty bin are excluded and
    reported; probes in bins with fewer than 50 samples are kept with a note.

    Raises:
        ValidationError: If fewer than three probes remain usable
    """
    opts = action_opts or SolverConfig()
    x = validate_vector(x, model.dimension, "x")
    hist = estimate_density(model, x, n_samples, box=box, bins=bins, seed=seed,
                            block_size=block_size, threads=threads)
    if probe_ys is None:
        probes = default_probes(model, x, n_probes, radius_range)
    else:
        probes = np.array([validate_vector(y, model.dimension, "probe") for y in probe_ys])

    results: List[ProbeResult] = []
    excluded: List[ExcludedProbe] = []
    notes: List[str] = []
    seen = set()
    for y in probes:
        index = hist.locate(y)
        if index is None:
            excluded.append(ExcludedProbe(y=y.tolist(), reason="outside histogram box"))
            continue
        count = int(hist.counts[index])
        if count == 0:
            excluded.append(ExcludedProbe(y=y.tolist(), reason="empty bin"))
            continue
        if index in seen:
            excluded.append(ExcludedProbe(y=y.tolist(), reason="bin already probed"))
            continue
        seen.add(index)
        if count < MIN_BIN_COUNT:
            notes.append(f"bin of probe {y.tolist()} holds only {count} samples")
        y_bin = hist.bin_center(index)
        cert = solve_min_action(model.system, x, y_bin, model.T, opts.K, opts, seed=seed, threads=threads)
        if not cert.converged:
            notes.append(f"action solve at {y_bin.tolist()} did not meet the endpoint tolerance")
        results.append(ProbeResult(
            y=y.tolist(),
            y_bin=y_bin.tolist(),
            count=count,
            log_density=float(np.log(hist.density[index])),
            log_density_se=float(1.0 / np.sqrt(count)),
            action=cert.value,
            converged=cert.converged,
        ))

    if len(results) < 3:
        raise ValidationError(f"need at least 3 usable probes, got {len(results)}")

    action = np.array([r.action for r in results])
    log_p = np.array([r.log_density for r in results])
    fit = linregress(action, log_p)
    r_value, _ = pearsonr(log_p, action)
    fitted = fit.intercept + fit.slope * action
    results = [
        ProbeResult(**{**r.__dict__, "residual": float(lp - fv)})
        for r, lp, fv in zip(results, log_p, fitted)
    ]

    report = SheuReport(
        probes=results,
        excluded=excluded,
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        slope_stderr=float(fit.stderr),
        pearson=float(r_value),
        histogram=hist,
        notes=notes,
    )
    slog.info("sheu check finished", b=report.b, a=report.intercept, pearson=report.pearson,
              used=len(results), excluded=len(excluded))
    if report.b <= 0:
        logger.warning(f"Fitted decay rate b={report.b:.4g} is not positive")
    return report
