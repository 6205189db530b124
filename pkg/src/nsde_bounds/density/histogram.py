"""
Histogram estimates of the transition density p_T(x, .) for d <= 2.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ..montecarlo.maurey import linearized_gaussian
from ..montecarlo.rng import blocks
from ..montecarlo.simulate import DEFAULT_BLOCK_SIZE, NeuralSdeModel, simulate_block
from ..validators import ValidationError, validate_box, validate_count, validate_vector

logger = logging.getLogger("nsde-bounds.density")

OUTSIDE_WARNING_FRACTION = 0.05
MAX_DIMENSION = 2


@dataclass(frozen=True)
class DensityHistogram:
    """Counts on a regular grid over [lo, hi] with per-bin density count / (n * volume)."""

    lo: np.ndarray
    hi: np.ndarray
    bins: int
    counts: np.ndarray
    n_samples: int

    @property
    def dimension(self) -> int:
        return int(self.lo.shape[0])

    @property
    def widths(self) -> np.ndarray:
        return (self.hi - self.lo) / self.bins

    @property
    def bin_volume(self) -> float:
        return float(np.prod(self.widths))

    @property
    def edges(self) -> List[np.ndarray]:
        return [np.linspace(self.lo[i], self.hi[i], self.bins + 1) for i in range(self.dimension)]

    @property
    def centers(self) -> List[np.ndarray]:
        return [0.5 * (e[:-1] + e[1:]) for e in self.edges]

    @property
    def density(self) -> np.ndarray:
        return self.counts / (self.n_samples * self.bin_volume)

    @property
    def standard_error(self) -> np.ndarray:
        """sqrt(count) / (n * volume) per bin."""
        return np.sqrt(self.counts) / (self.n_samples * self.bin_volume)

    @property
    def inside_fraction(self) -> float:
        return float(self.counts.sum()) / self.n_samples

    @property
    def mass(self) -> float:
        """sum(density * volume); equals the inside fraction."""
        return float(np.sum(self.density) * self.bin_volume)

    def locate(self, y) -> Optional[Tuple[int, ...]]:
        """Bin index containing y, or None outside the box."""
        y = validate_vector(y, self.dimension, "y")
        if np.any(y < self.lo) or np.any(y > self.hi):
            return None
        idx = np.floor((y - self.lo) / self.widths).astype(int)
        idx = np.clip(idx, 0, self.bins - 1)
        return tuple(int(i) for i in idx)

    def bin_center(self, index: Tuple[int, ...]) -> np.ndarray:
        return self.lo + (np.asarray(index) + 0.5) * self.widths

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "lo": self.lo.tolist(),
            "hi": self.hi.tolist(),
            "bins": self.bins,
            "n_samples": self.n_samples,
            "inside_fraction": self.inside_fraction,
            "mass": self.mass,
        }

    def csv_header(self) -> List[str]:
        axes = [f"y_{i + 1}" for i in range(self.dimension)]
        return axes + ["count", "density", "se"]

    def csv_rows(self) -> List[list]:
        centers = self.centers
        density = self.density
        se = self.standard_error
        rows = []
        for index in np.ndindex(*self.counts.shape):
            point = [float(centers[axis][i]) for axis, i in enumerate(index)]
            rows.append(point + [int(self.counts[index]), float(density[index]), float(se[index])])
        return rows


def default_box(model: NeuralSdeModel, x, width: float = 6.0) -> Tuple[np.ndarray, np.ndarray]:
    """phi_T(x) +- width standard deviations of the linearized endpoint law."""
    picture = linearized_gaussian(model, x)
    sigma = np.sqrt(np.clip(np.diag(picture.covariance), 1e-300, None))
    return picture.mean - width * sigma, picture.mean + width * sigma


def estimate_density(model: NeuralSdeModel, x, n_samples: int,
                     box: Optional[Tuple[Sequence[float], Sequence[float]]] = None,
                     bins: int = 64, seed: int = 0, block_size: int = DEFAULT_BLOCK_SIZE,
                     threads: int = 1) -> DensityHistogram:
    """Histogram of n Euler-Maruyama endpoints from x.

    Blocks are simulated and binned independently; integer counts are summed,
    so the histogram is identical for any thread count.

    Raises:
        ValidationError: If d > 2 or bins < 8
    """
    d = model.dimension
    if d > MAX_DIMENSION:
        raise ValidationError(f"density estimation supports d <= {MAX_DIMENSION}, got d={d}")
    bins = validate_count(bins, 8, "bins")
    n_samples = validate_count(n_samples, 1, "n_samples")
    block_size = validate_count(block_size, 1, "block_size")
    x = validate_vector(x, d, "x")
    lo, hi = default_box(model, x) if box is None else validate_box(box[0], box[1], d)
    ranges = [(float(lo[i]), float(hi[i])) for i in range(d)]

    def count_block(block: Tuple[int, int, int]) -> np.ndarray:
        b, start, stop = block
        ends = simulate_block(model, np.broadcast_to(x, (stop - start, d)), seed, b)
        counts, _ = np.histogramdd(ends, bins=bins, range=ranges)
        return counts.astype(np.int64)

    work = list(blocks(n_samples, block_size))
    if threads > 1 and len(work) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            partial = list(pool.map(count_block, work))
    else:
        partial = [count_block(block) for block in work]
    counts = np.sum(partial, axis=0)

    hist = DensityHistogram(lo=lo, hi=hi, bins=bins, counts=counts, n_samples=n_samples)
    outside = 1.0 - hist.inside_fraction
    if outside > OUTSIDE_WARNING_FRACTION:
        logger.warning(f"{outside:.1%} of {n_samples} samples fell outside the density box")
    logger.debug(f"density histogram: d={d}, bins={bins}, n={n_samples}, inside={hist.inside_fraction:.4f}")
    return hist
