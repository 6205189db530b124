"""
Tests for histogram density estimation and the log-density versus action fit.
"""

import numpy as np
import pytest

from tests.factories import random_rnn_params

from nsde_bounds.config.models import SolverConfig
from nsde_bounds.density import (
    DensityHistogram,
    default_box,
    default_probes,
    estimate_density,
    sheu_sandwich_check,
)
from nsde_bounds.dynamics import LinearParams, build_linear_system, build_rnn_system
from nsde_bounds.linear import exact_density_linear, gramian
from nsde_bounds.montecarlo import NeuralSdeModel
from nsde_bounds.validators import ValidationError


def ou_model(ou_params, L=200):
    return NeuralSdeModel(system=build_linear_system(ou_params), alpha=np.ones(1), T=1.0, L=L)


def l1_error(hist: DensityHistogram, params: LinearParams, x) -> float:
    gram = gramian(params, 1.0)
    exact = np.array([exact_density_linear(params, x, [c], 1.0, gram=gram) for c in hist.centers[0]])
    return float(np.sum(np.abs(hist.density - exact)) * hist.bin_volume)


class TestDensityHistogram:
    """Test the histogram container."""

    def setup_method(self):
        self.hist = DensityHistogram(lo=np.array([0.0, 0.0]), hi=np.array([1.0, 2.0]), bins=8,
                                     counts=np.ones((8, 8), dtype=np.int64), n_samples=100)

    def test_geometry(self):
        np.testing.assert_allclose(self.hist.widths, [0.125, 0.25])
        assert self.hist.bin_volume == pytest.approx(0.03125)
        assert len(self.hist.edges[1]) == 9
        assert self.hist.centers[0][0] == pytest.approx(0.0625)

    def test_mass_is_inside_fraction(self):
        assert self.hist.inside_fraction == pytest.approx(0.64)
        assert self.hist.mass == pytest.approx(0.64)

    def test_locate(self):
        assert self.hist.locate([0.0, 0.0]) == (0, 0)
        assert self.hist.locate([1.0, 2.0]) == (7, 7)
        assert self.hist.locate([0.3, 1.1]) == (2, 4)
        assert self.hist.locate([-0.1, 1.0]) is None
        np.testing.assert_allclose(self.hist.bin_center((2, 4)), [0.3125, 1.125])

    def test_standard_error(self):
        np.testing.assert_allclose(self.hist.standard_error, self.hist.density)

    def test_csv(self):
        assert self.hist.csv_header() == ["y_1", "y_2", "count", "density", "se"]
        rows = self.hist.csv_rows()
        assert len(rows) == 64
        assert rows[0][:3] == [0.0625, 0.125, 1]


class TestEstimateDensity:
    """Test Monte Carlo histograms against the exact Gaussian density."""

    def test_linear_density_l1(self, ou_params):
        hist = estimate_density(ou_model(ou_params), [0.0], 100_000, bins=64, seed=1)
        assert hist.inside_fraction > 0.999
        assert l1_error(hist, ou_params, [0.0]) <= 0.04

    @pytest.mark.slow
    def test_linear_density_l1_acceptance(self, ou_params):
        hist = estimate_density(ou_model(ou_params), [0.5], 1_000_000, bins=64, seed=2)
        assert l1_error(hist, ou_params, [0.5]) <= 0.02

    def test_thread_count_does_not_change_counts(self, rnn_system):
        model = NeuralSdeModel(system=rnn_system, alpha=np.ones(2), T=1.0, L=20)
        serial = estimate_density(model, [0.0, 0.0], 5000, bins=16, seed=3, block_size=512)
        threaded = estimate_density(model, [0.0, 0.0], 5000, bins=16, seed=3, block_size=512, threads=4)
        np.testing.assert_array_equal(serial.counts, threaded.counts)
        assert serial.counts.shape == (16, 16)
        assert serial.counts.sum() <= 5000

    def test_default_box_is_six_sigma(self, ou_params):
        lo, hi = default_box(ou_model(ou_params), [1.0])
        sigma = np.sqrt((1 - np.exp(-2.0)) / 2)
        assert lo[0] == pytest.approx(np.exp(-1.0) - 6 * sigma, rel=1e-8)
        assert hi[0] == pytest.approx(np.exp(-1.0) + 6 * sigma, rel=1e-8)

    def test_explicit_box(self, ou_params):
        hist = estimate_density(ou_model(ou_params, L=10), [0.0], 1000, box=([-0.1], [0.1]), bins=8)
        assert hist.inside_fraction < 0.5
        np.testing.assert_allclose(hist.lo, [-0.1])

    def test_three_dimensions_rejected(self):
        sys = build_linear_system(LinearParams(A=np.zeros((3, 3)), G=np.eye(3)))
        model = NeuralSdeModel(system=sys, alpha=np.ones(3), T=1.0, L=5)
        with pytest.raises(ValidationError, match="d <= 2"):
            estimate_density(model, np.zeros(3), 10)

    def test_too_few_bins(self, ou_params):
        with pytest.raises(ValidationError):
            estimate_density(ou_model(ou_params, L=5), [0.0], 10, bins=4)


class TestSheuCheck:
    """Test the fit of log p_hat against the minimum action."""

    def test_default_probes_one_dimension(self, ou_params):
        model = ou_model(ou_params)
        probes = default_probes(model, [0.0], n_probes=4, radius_range=(1.0, 2.0))
        sigma = np.sqrt((1 - np.exp(-2.0)) / 2)
        np.testing.assert_allclose(probes[:, 0], sigma * np.array([1.0, -4 / 3, 5 / 3, -2.0]), rtol=1e-8)

    def test_default_probes_two_dimensions(self, rnn_system):
        model = NeuralSdeModel(system=rnn_system, alpha=np.ones(2), T=1.0, L=10)
        probes = default_probes(model, [0.0, 0.0], n_probes=6)
        assert probes.shape == (6, 2)
        assert len({tuple(np.round(p, 8)) for p in probes}) == 6

    def test_default_probes_validation(self, ou_params):
        with pytest.raises(ValidationError):
            default_probes(ou_model(ou_params), [0.0], radius_range=(2.0, 1.0))

    def test_linear_fit_recovers_unit_rate(self, ou_params):
        model = ou_model(ou_params)
        report = sheu_sandwich_check(model, [0.0], n_samples=200_000, seed=4,
                                     action_opts=SolverConfig(K=50))
        assert report.b == pytest.approx(1.0, abs=0.15)
        assert report.pearson < -0.99
        assert len(report.probes) >= 10
        assert all(p.converged for p in report.probes)
        data = report.to_dict()
        assert data["n_probes"] == len(report.probes)
        assert len(report.csv_rows()) == len(report.probes)
        assert report.csv_header() == ["y_1", "log_p_hat", "I_T", "residual"]

    @pytest.mark.slow
    def test_linear_fit_acceptance(self, ou_params):
        model = ou_model(ou_params)
        report = sheu_sandwich_check(model, [0.0], n_samples=1_000_000, seed=5)
        W = gramian(ou_params, 1.0).W[0, 0]
        assert report.b == pytest.approx(1.0, abs=0.1)
        assert report.intercept == pytest.approx(-0.5 * np.log(2 * np.pi * W), abs=0.1)

    def test_rnn_rate_is_positive(self):
        sys = build_rnn_system(random_rnn_params(2, 1))
        model = NeuralSdeModel(system=sys, alpha=np.ones(1), T=1.0, L=100)
        report = sheu_sandwich_check(model, [0.2], n_samples=100_000, seed=6, n_probes=8,
                                     action_opts=SolverConfig(K=40))
        assert report.b > 0

    @pytest.mark.slow
    def test_rnn_log_density_tracks_action(self):
        sys = build_rnn_system(random_rnn_params(2, 1))
        model = NeuralSdeModel(system=sys, alpha=np.ones(1), T=1.0, L=100)
        report = sheu_sandwich_check(model, [0.2], n_samples=1_000_000, seed=7, n_probes=24)
        assert len(report.probes) >= 20
        assert report.pearson <= -0.9

    def test_probes_outside_box_are_excluded(self, ou_params):
        model = ou_model(ou_params, L=20)
        probes = [[0.05], [0.3], [-0.3], [0.6], [50.0]]
        report = sheu_sandwich_check(model, [0.0], probe_ys=probes, n_samples=20_000, seed=1,
                                     action_opts=SolverConfig(K=20))
        assert len(report.probes) == 4
        assert report.excluded[0].reason == "outside histogram box"

    def test_duplicate_bins_are_excluded(self, ou_params):
        model = ou_model(ou_params, L=20)
        probes = [[0.05], [0.06], [0.3], [-0.3]]
        report = sheu_sandwich_check(model, [0.0], probe_ys=probes, n_samples=20_000, seed=1,
                                     action_opts=SolverConfig(K=20))
        assert [e.reason for e in report.excluded] == ["bin already probed"]

    def test_too_few_usable_probes(self, ou_params):
        model = ou_model(ou_params, L=20)
        with pytest.raises(ValidationError, match="at least 3"):
            sheu_sandwich_check(model, [0.0], probe_ys=[[40.0], [0.0]], n_samples=1000)
