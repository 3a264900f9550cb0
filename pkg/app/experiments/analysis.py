"""Shape analysis shared by the experiments: boundaries, Hausdorff distances, fits."""
import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from app.core.errors import InsufficientSampleError
from app.lattice import dense_occupancy
from app.models.experiment import Interval

logger = logging.getLogger(__name__)


def outer_boundary_points(vertices: Sequence[Sequence[int]], d: int) -> np.ndarray:
    """Outer boundary of the fattened cluster (unit cubes around the vertices).

    These are the level-1/2 crossings of marching squares (cubes for d=3) on the
    hole-filled occupancy array: the midpoints between each occupied site and
    its empty neighbours.
    """
    grid, lower = dense_occupancy(vertices, d)
    filled = ndimage.binary_fill_holes(np.pad(grid, 1))
    points = []
    for axis in range(d):
        diff = np.diff(filled.astype(np.int8), axis=axis)
        idx = np.argwhere(diff != 0).astype(float)
        idx[:, axis] += 0.5
        points.append(idx)
    out = np.concatenate(points) - 1.0 + lower
    return out


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    ab, _ = cKDTree(b).query(a)
    ba, _ = cKDTree(a).query(b)
    return float(max(ab.max(), ba.max()))


def rescale_exponent(alpha: float) -> float:
    """Clusters at time t scale like t^(1/(1-alpha))."""
    return 1.0 / (1.0 - alpha)


def bootstrap_interval(samples: np.ndarray, statistic: Callable[[np.ndarray], float],
                       resamples: int = 200, seed: int = 0, level: float = 0.95) -> Interval:
    """Percentile interval over row resamples, widened to contain the point estimate."""
    samples = np.asarray(samples)
    rng = np.random.default_rng(seed)
    estimate = statistic(samples)
    values = [statistic(samples[rng.integers(0, len(samples), len(samples))]) for _ in range(resamples)]
    tail = 50.0 * (1.0 - level)
    low, high = np.nanpercentile(values, [tail, 100.0 - tail])
    return Interval(low=float(min(low, estimate)), high=float(max(high, estimate)))


def loglog_fit(times: Sequence[float], values: Sequence[float]) -> Tuple[float, float]:
    """(slope, intercept) of log(values) against log(times)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    if keep.sum() < 2:
        raise InsufficientSampleError("a log-log fit needs two positive values")
    slope, intercept = np.polyfit(np.log(times[keep]), np.log(values[keep]), 1)
    return float(slope), float(intercept)


def fluctuation_widths(radii: np.ndarray) -> np.ndarray:
    """Mean over replicates of the largest radial deviation from the replicate mean.

    ``radii`` has shape (times, replicates, directions).
    """
    radii = np.asarray(radii, dtype=float)
    mean = radii.mean(axis=1, keepdims=True)
    return np.abs(radii - mean).max(axis=2).mean(axis=1)


def fit_chi(times: Sequence[float], radii: np.ndarray, resamples: int = 200,
            seed: int = 0) -> Tuple[float, float, Interval, np.ndarray]:
    """Fit width(t) ~ t^(-chi); returns (chi, intercept, bootstrap interval, widths)."""
    radii = np.asarray(radii, dtype=float)
    widths = fluctuation_widths(radii)
    slope, intercept = loglog_fit(times, widths)
    by_replicate = np.swapaxes(radii, 0, 1)

    def chi_of(sample: np.ndarray) -> float:
        w = fluctuation_widths(np.swapaxes(sample, 0, 1))
        if np.any(w <= 0):
            return float("nan")
        return -loglog_fit(times, w)[0]

    interval = bootstrap_interval(by_replicate, chi_of, resamples, seed)
    return -slope, intercept, interval, widths
