"""Kernel density, histogram, and artifact writer tests."""

import math

import numpy as np
import pytest
from scipy.stats import gaussian_kde

from chebdea.errors import DataError
from chebdea.report import (
    histogram,
    kernel_density,
    silverman_bandwidth,
    write_curve_csv,
    write_density_csv,
    write_histogram_csv,
    write_scatter_csv,
)
from chebdea._util import atomic_write


def test_silverman_hand_value():
    # sd of {0, 1} is sqrt(0.5); h = 1.06 * sqrt(0.5) * 2^(-1/5)
    expected = 1.06 * math.sqrt(0.5) * 2.0 ** (-0.2)
    assert silverman_bandwidth([0.0, 1.0]) == pytest.approx(expected, rel=1e-15)


def test_bandwidth_error_cases():
    with pytest.raises(DataError, match="at least 2"):
        silverman_bandwidth([1.0])
    with pytest.raises(DataError, match="zero variance"):
        silverman_bandwidth([0.0, 0.0])
    with pytest.raises(DataError, match="empty"):
        kernel_density([])
    with pytest.raises(DataError, match="non-finite"):
        kernel_density([0.0, np.nan])
    with pytest.raises(ValueError, match="positive"):
        kernel_density([0.0, 1.0], bandwidth=0.0)
    with pytest.raises(ValueError, match="grid is empty"):
        kernel_density([0.0, 1.0], grid=[])


def test_symmetric_sample_gives_symmetric_density():
    estimate = kernel_density([-1.0, 1.0])
    np.testing.assert_allclose(estimate.density, estimate.density[::-1], atol=1e-12)
    assert estimate.n == 2
    peak_gap = abs(estimate.grid[np.argmax(estimate.density)])
    assert peak_gap <= 1.0 + 1e-12


def test_standard_normal_density_near_the_mode():
    rng = np.random.default_rng(123)
    sample = rng.standard_normal(1000)
    estimate = kernel_density(sample, grid=[0.0])
    assert estimate.density[0] == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), abs=0.05)


def test_density_mass_is_close_to_one():
    rng = np.random.default_rng(5)
    for _ in range(20):
        sample = rng.normal(rng.uniform(-3, 3), rng.uniform(0.1, 2.0), rng.integers(2, 200))
        estimate = kernel_density(sample)
        assert 0.99 <= estimate.integral() <= 1.01


def test_density_matches_scipy_reference():
    rng = np.random.default_rng(17)
    for _ in range(10):
        sample = rng.normal(0.0, 1.5, rng.integers(5, 80))
        grid = np.linspace(sample.min() - 2, sample.max() + 2, 101)
        estimate = kernel_density(sample, grid=grid)
        factor = estimate.bandwidth / sample.std(ddof=1)
        reference = gaussian_kde(sample, bw_method=factor)(grid)
        np.testing.assert_allclose(estimate.density, reference, atol=1e-10)


def test_explicit_bandwidth_is_used():
    estimate = kernel_density([0.0, 1.0], bandwidth=0.25)
    assert estimate.bandwidth == 0.25
    # a single point's kernel evaluated at its center
    single = kernel_density([0.0, 10.0], grid=[0.0], bandwidth=0.5)
    expected = 0.5 * (1.0 / (0.5 * math.sqrt(2 * math.pi)))
    assert single.density[0] == pytest.approx(expected, abs=1e-12)


def test_histogram_half_open_bins():
    hist = histogram([0.1, 0.5, 0.5], bin_width=0.4)
    np.testing.assert_allclose(hist.edges, [0.0, 0.4, 0.8])
    np.testing.assert_array_equal(hist.counts, [1, 2])
    assert hist.n_bins == 2
    assert hist.total() == 3


def test_histogram_grid_is_anchored_at_the_origin():
    hist = histogram([0.55, 1.9], bin_width=0.5)
    np.testing.assert_allclose(hist.edges, [0.5, 1.0, 1.5, 2.0])
    np.testing.assert_array_equal(hist.counts, [1, 0, 1])
    shifted = histogram([-0.3, 0.2], bin_width=0.25, origin=0.1)
    np.testing.assert_allclose(shifted.edges, [-0.4, -0.15, 0.1, 0.35])
    np.testing.assert_array_equal(shifted.counts, [1, 0, 1])


def test_histogram_counts_are_conserved():
    rng = np.random.default_rng(99)
    for _ in range(50):
        sample = rng.normal(rng.uniform(-5, 5), rng.uniform(0.01, 3.0), rng.integers(1, 300))
        width = rng.uniform(0.05, 2.0)
        hist = histogram(sample, bin_width=width)
        assert hist.total() == sample.size
        assert hist.edges[0] <= sample.min()
        assert hist.edges[-1] >= sample.max()
        assert hist.edges[0] > sample.min() - width - 1e-12


def test_histogram_explicit_edges():
    hist = histogram([0.5, 1.5, 9.0], edges=[0.0, 1.0, 2.0])
    np.testing.assert_array_equal(hist.counts, [1, 1])
    assert hist.total() == 2  # 9.0 falls outside the explicit edges


def test_histogram_errors():
    with pytest.raises(ValueError, match="either bin_width or edges"):
        histogram([1.0])
    with pytest.raises(ValueError, match="positive"):
        histogram([1.0], bin_width=-1.0)
    with pytest.raises(ValueError, match="at least 2"):
        histogram([1.0], edges=[0.0])
    with pytest.raises(ValueError, match="increasing"):
        histogram([1.0], edges=[0.0, 0.0, 1.0])
    with pytest.raises(DataError, match="empty"):
        histogram([], bin_width=1.0)


def test_density_csv_bytes(tmp_path):
    estimate = kernel_density([0.0, 1.0], grid=[0.25, 0.5], bandwidth=1.0)
    path = tmp_path / "density.csv"
    write_density_csv(estimate, path)
    lines = path.read_bytes().split(b"\r\n")
    assert lines[0] == b"x,density"
    assert lines[1].startswith(b"0.25,")
    assert float(lines[1].split(b",")[1]) == pytest.approx(estimate.density[0])
    assert lines[3] == b""


def test_histogram_csv_bytes(tmp_path):
    hist = histogram([0.1, 0.5, 0.5], bin_width=0.4)
    path = tmp_path / "hist.csv"
    write_histogram_csv(hist, path)
    assert path.read_bytes() == b"bin_lo,bin_hi,count\r\n0.0,0.4,1\r\n0.4,0.8,2\r\n"


def test_scatter_and_curve_csv(tmp_path):
    scatter = tmp_path / "scatter.csv"
    write_scatter_csv([("AT", 0.05, 1.25, "general")], scatter)
    assert scatter.read_bytes() == b"unit,z,r,model\r\nAT,0.05,1.25,general\r\n"
    curve = tmp_path / "curve.csv"
    write_curve_csv(np.array([[0.0, 1.5], [0.1, 0.5]]), curve)
    assert curve.read_bytes() == b"z,r\r\n0.0,1.5\r\n0.1,0.5\r\n"
    with pytest.raises(ValueError, match=r"\(n, 2\)"):
        write_curve_csv(np.ones((2, 3)), curve)


def test_atomic_write_leaves_no_file_on_failure(tmp_path):
    target = tmp_path / "out.csv"
    with pytest.raises(RuntimeError):
        with atomic_write(target) as handle:
            handle.write("partial")
            raise RuntimeError("boom")
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []
    # and overwrites atomically when the write succeeds
    target.write_text("old")
    with atomic_write(target) as handle:
        handle.write("new")
    assert target.read_text() == "new"
