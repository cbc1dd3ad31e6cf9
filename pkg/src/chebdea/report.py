"""Plot-ready descriptive statistics: kernel densities and histograms.

Figures are emitted as data files rather than images; rendering is left
to whatever plotting tool the user prefers. All writers are atomic and
byte-deterministic for identical inputs.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._util import atomic_write, fmt_float
from .errors import DataError

_SILVERMAN_FACTOR = 1.06


def _clean_sample(sample) -> np.ndarray:
    arr = np.asarray(sample, dtype=float).ravel()
    if arr.size == 0:
        raise DataError("sample is empty")
    if not np.all(np.isfinite(arr)):
        raise DataError("sample contains non-finite values")
    return arr


@dataclass(frozen=True)
class DensityEstimate:
    """Gaussian-kernel density evaluated on an ascending grid."""

    grid: np.ndarray
    density: np.ndarray
    bandwidth: float
    n: int

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        density = np.asarray(self.density, dtype=float)
        grid.setflags(write=False)
        density.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "density", density)

    def integral(self) -> float:
        """Trapezoidal mass over the grid; close to 1 when the grid covers the sample."""
        return float(np.trapezoid(self.density, self.grid))


def silverman_bandwidth(sample) -> float:
    """Rule-of-thumb kernel width 1.06 * sd * n^(-1/5)."""
    arr = _clean_sample(sample)
    if arr.size < 2:
        raise DataError("bandwidth selection needs at least 2 observations")
    sd = float(np.std(arr, ddof=1))
    if sd == 0.0:
        raise DataError("sample has zero variance; kernel bandwidth is undefined")
    return _SILVERMAN_FACTOR * sd * arr.size ** (-1.0 / 5.0)


def kernel_density(
    sample,
    grid=None,
    bandwidth=None,
    n_grid: int = 512,
    padding: float = 4.0,
) -> DensityEstimate:
    """Gaussian-kernel density estimate of a sample.

    Without an explicit `grid`, evaluation runs on `n_grid` equally spaced
    points covering the sample extended by `padding` bandwidths on either
    side, which keeps essentially all kernel mass on the grid. Without an
    explicit `bandwidth`, Silverman's rule is used; a sample that cannot
    support it (fewer than 2 points, or zero variance) is a DataError.
    """
    arr = _clean_sample(sample)
    if bandwidth is None:
        h = silverman_bandwidth(arr)
    else:
        h = float(bandwidth)
        if not h > 0:
            raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    if grid is None:
        grid = np.linspace(arr.min() - padding * h, arr.max() + padding * h, n_grid)
    else:
        grid = np.asarray(grid, dtype=float).ravel()
        if grid.size == 0:
            raise ValueError("grid is empty")
    standardized = (grid[:, None] - arr[None, :]) / h
    kernel = np.exp(-0.5 * standardized ** 2) / math.sqrt(2.0 * math.pi)
    density = kernel.sum(axis=1) / (arr.size * h)
    return DensityEstimate(grid=grid, density=density, bandwidth=h, n=arr.size)


@dataclass(frozen=True)
class Histogram:
    """Counts over half-open bins [edge[i], edge[i+1]); the last bin is closed."""

    edges: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        counts = np.asarray(self.counts, dtype=int)
        edges.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "counts", counts)

    @property
    def n_bins(self) -> int:
        return self.counts.shape[0]

    def total(self) -> int:
        return int(self.counts.sum())


def histogram(sample, bin_width: float = None, origin: float = 0.0, edges=None) -> Histogram:
    """Bin a sample into half-open bins (last bin closed, numpy semantics).

    Either pass explicit `edges`, or a `bin_width`: then the bins form a
    grid anchored at `origin` (edges at origin + k*width) and extended to
    cover the whole sample, so counts always sum to the sample size.
    Out-of-range values are possible only with explicit edges.
    """
    arr = _clean_sample(sample)
    if edges is not None:
        edges = np.asarray(edges, dtype=float).ravel()
        if edges.size < 2:
            raise ValueError("edges must contain at least 2 boundaries")
        if np.any(np.diff(edges) <= 0):
            raise ValueError("edges must be strictly increasing")
    else:
        if bin_width is None:
            raise ValueError("provide either bin_width or edges")
        width = float(bin_width)
        if not width > 0:
            raise ValueError(f"bin width must be positive, got {bin_width}")
        lo, hi = float(arr.min()), float(arr.max())
        start = origin + math.floor((lo - origin) / width) * width
        n_bins = max(1, int(math.ceil((hi - start) / width)))
        # roundoff can leave the top edge a hair below the maximum
        while start + n_bins * width < hi:
            n_bins += 1
        edges = start + width * np.arange(n_bins + 1)
    counts, edges = np.histogram(arr, bins=edges)
    return Histogram(edges=edges, counts=counts)


def write_density_csv(estimate: DensityEstimate, path) -> None:
    with atomic_write(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["x", "density"])
        for x, d in zip(estimate.grid, estimate.density):
            writer.writerow([fmt_float(x), fmt_float(d)])


def write_histogram_csv(hist: Histogram, path) -> None:
    with atomic_write(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["bin_lo", "bin_hi", "count"])
        for i in range(hist.n_bins):
            writer.writerow([fmt_float(hist.edges[i]), fmt_float(hist.edges[i + 1]), str(int(hist.counts[i]))])


def write_scatter_csv(rows, path) -> None:
    """Write (unit, z, r, model) score/driver pairs for scatter plots."""
    with atomic_write(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["unit", "z", "r", "model"])
        for unit, z, r, model in rows:
            writer.writerow([unit, fmt_float(z), fmt_float(r), model])


def write_curve_csv(curve: np.ndarray, path) -> None:
    """Write an (n, 2) array of (z, predicted score) pairs."""
    curve = np.asarray(curve, dtype=float)
    if curve.ndim != 2 or curve.shape[1] != 2:
        raise ValueError(f"curve must be an (n, 2) array, got shape {curve.shape}")
    with atomic_write(path) as handle:
        writer = csv.writer(handle)
        writer.writerow(["z", "r"])
        for z, r in curve:
            writer.writerow([fmt_float(z), fmt_float(r)])
