"""
Tests for Euler-Maruyama simulation, V_pi estimation and the 1/N rate experiment.
"""

import numpy as np
import pytest

from tests.factories import random_linear_params, random_rnn_params

from nsde_bounds.config.models import BoxConfig, SamplerConfig
from nsde_bounds.core.exceptions import IntegrationError
from nsde_bounds.dynamics import LinearParams, build_expression_system, build_linear_system, build_rnn_system
from nsde_bounds.flow import flow
from nsde_bounds.linear import gramian
from nsde_bounds.montecarlo import (
    BoxSampler,
    GaussianSampler,
    NeuralSdeModel,
    derive_generator,
    derive_seed,
    em_endpoint,
    em_endpoints,
    estimate_F,
    estimate_Vpi,
    flow_second_moment,
    linear_reference,
    linearized_gaussian,
    maurey_rate_experiment,
    sampler_from_config,
    vpi_upper_bound,
)
from nsde_bounds.montecarlo.rng import blocks
from nsde_bounds.montecarlo.simulate import summarize
from nsde_bounds.validators import ValidationError


def euler_covariance(p: LinearParams, T: float, L: int) -> np.ndarray:
    """Exact covariance of the Euler-Maruyama endpoint of a linear SDE."""
    h = T / L
    step = np.eye(p.dimension) + h * p.A
    cov = np.zeros((p.dimension, p.dimension))
    for _ in range(L):
        cov = step @ cov @ step.T + h * p.covariance_rate
    return cov


def trivial_model(d: int = 1, L: int = 10, T: float = 1.0, alpha=None) -> NeuralSdeModel:
    sys = build_linear_system(LinearParams(A=np.zeros((d, d)), G=np.eye(d)))
    return NeuralSdeModel(system=sys, alpha=np.ones(d) if alpha is None else alpha, T=T, L=L)


class TestStreams:
    """Test counter-based random streams."""

    def test_same_counters_same_draws(self):
        a = derive_generator(7, 0, 3).standard_normal(5)
        b = derive_generator(7, 0, 3).standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_different_counters_differ(self):
        a = derive_generator(7, 0, 3).standard_normal(5)
        assert not np.array_equal(a, derive_generator(7, 0, 4).standard_normal(5))
        assert not np.array_equal(a, derive_generator(8, 0, 3).standard_normal(5))
        assert derive_seed(1, 2) != derive_seed(1, 3)

    def test_large_seed(self):
        derive_generator(2**64 - 1, 1).standard_normal()

    def test_invalid_seed_rejected(self):
        with pytest.raises(ValidationError):
            derive_generator(-1, 0)
        with pytest.raises(ValidationError):
            derive_seed(2**64, 0)

    def test_blocks_partition(self):
        assert list(blocks(10, 4)) == [(0, 0, 4), (1, 4, 8), (2, 8, 10)]
        assert list(blocks(0, 4)) == []


class TestEulerMaruyama:
    """Test path simulation."""

    def test_model_validation(self, ou_system):
        with pytest.raises(ValidationError):
            NeuralSdeModel(system=ou_system, alpha=np.ones(2), T=1.0, L=10)
        with pytest.raises(ValidationError):
            NeuralSdeModel(system=ou_system, alpha=np.ones(1), T=0.0, L=10)
        with pytest.raises(ValidationError):
            NeuralSdeModel(system=ou_system, alpha=np.ones(1), T=1.0, L=0)

    def test_single_endpoint_is_deterministic(self, rnn_system):
        model = NeuralSdeModel(system=rnn_system, alpha=np.ones(2), T=1.0, L=50)
        np.testing.assert_array_equal(em_endpoint(model, [0.1, 0.2], 3), em_endpoint(model, [0.1, 0.2], 3))
        assert not np.array_equal(em_endpoint(model, [0.1, 0.2], 3), em_endpoint(model, [0.1, 0.2], 4))

    def test_thread_count_does_not_change_output(self, rnn_system):
        model = NeuralSdeModel(system=rnn_system, alpha=np.ones(2), T=1.0, L=20)
        serial = em_endpoints(model, [0.0, 0.0], 1000, seed=2, block_size=128)
        threaded = em_endpoints(model, [0.0, 0.0], 1000, seed=2, block_size=128, threads=4)
        np.testing.assert_array_equal(serial, threaded)

    def test_batch_of_starting_points(self, rnn_system):
        model = NeuralSdeModel(system=rnn_system, alpha=np.ones(2), T=1.0, L=20)
        starts = np.random.default_rng(0).standard_normal((7, 2))
        assert em_endpoints(model, starts, seed=1).shape == (7, 2)
        with pytest.raises(ValidationError):
            em_endpoints(model, starts, n=5)
        with pytest.raises(ValidationError):
            em_endpoints(model, np.zeros((3, 3)))

    def test_small_noise_follows_the_flow(self):
        sys = build_rnn_system(random_rnn_params(4, 2, c=1e-4))
        model = NeuralSdeModel(system=sys, alpha=np.ones(2), T=1.0, L=10000)
        x = np.array([0.5, -0.3])
        end = em_endpoint(model, x, 0)
        np.testing.assert_allclose(end, flow(sys, x, 1.0, 1000).endpoint, atol=1e-3)

    def test_brownian_endpoint_covariance(self):
        model = trivial_model(d=2, L=5)
        n = 100_000
        ends = em_endpoints(model, [1.0, -1.0], n, seed=11)
        increments = ends - np.array([1.0, -1.0])
        cov = np.cov(increments, rowvar=False)
        assert abs(cov[0, 0] - 1.0) <= 4 * np.sqrt(2.0 / n)
        assert abs(cov[1, 1] - 1.0) <= 4 * np.sqrt(2.0 / n)
        assert abs(cov[0, 1]) <= 4 * np.sqrt(1.0 / n)
        assert np.all(np.abs(increments.mean(axis=0)) <= 4 * np.sqrt(1.0 / n))

    def test_linear_endpoint_covariance_matches_gramian(self):
        p = random_linear_params(3, 2)
        model = NeuralSdeModel(system=build_linear_system(p), alpha=np.ones(2), T=1.0, L=200)
        n = 100_000
        ends = em_endpoints(model, [0.5, 0.5], n, seed=5)
        cov = np.cov(ends, rowvar=False)
        W = gramian(p, 1.0).W
        # entrywise standard error of a sample covariance for Gaussian data
        se = np.sqrt((W ** 2 + np.outer(np.diag(W), np.diag(W))) / n)
        exact = euler_covariance(p, 1.0, 200)
        assert np.all(np.abs(cov - exact) <= 4 * se)
        np.testing.assert_allclose(exact, W, rtol=0.02, atol=0.02)

    def test_blow_up_raises(self):
        sys = build_expression_system(["x1 ** 3"])
        model = NeuralSdeModel(system=sys, alpha=np.ones(1), T=1.0, L=10)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(IntegrationError):
                em_endpoints(model, [10.0], 4)


class TestEstimateF:
    """Test Monte Carlo estimates of F and V_pi."""

    def test_linear_mean(self):
        p = random_linear_params(6, 2)
        model = NeuralSdeModel(system=build_linear_system(p), alpha=np.array([1.0, -2.0]), T=1.0, L=100)
        x = np.array([1.0, 0.5])
        est = estimate_F(model, x, 100_000, seed=9)
        assert abs(est.mean - linear_reference(model)(x)) <= 4 * est.se

    def test_brownian_readout_variance(self):
        alpha = np.array([1.0, 2.0])
        model = trivial_model(d=2, L=4, T=0.5, alpha=alpha)
        n = 50_000
        est = estimate_F(model, [0.3, 0.4], n, seed=1)
        assert abs(est.mean - alpha @ [0.3, 0.4]) <= 4 * est.se
        expected_var = 5.0 * 0.5
        assert abs(est.variance - expected_var) <= 4 * expected_var * np.sqrt(2.0 / (n - 1))

    def test_estimate_is_reproducible(self, rnn_system):
        model = NeuralSdeModel(system=rnn_system, alpha=np.ones(2), T=1.0, L=20)
        a = estimate_F(model, [0.0, 0.0], 500, seed=3)
        b = estimate_F(model, [0.0, 0.0], 500, seed=3, threads=3, block_size=64)
        c = estimate_F(model, [0.0, 0.0], 500, seed=3, block_size=64)
        assert a.to_dict() == estimate_F(model, [0.0, 0.0], 500, seed=3).to_dict()
        assert b.mean == c.mean

    def test_vpi_brownian(self):
        model = trivial_model(d=1, L=4)
        est = estimate_Vpi(model, GaussianSampler(mean=np.zeros(1), scale=2.0), 64, 256, seed=0)
        assert abs(est.mean - 1.0) <= 4 * est.se

    def test_vpi_linear_is_readout_of_the_covariance(self):
        p = random_linear_params(2, 2)
        alpha = np.array([1.0, 1.0])
        model = NeuralSdeModel(system=build_linear_system(p), alpha=alpha, T=1.0, L=100)
        est = estimate_Vpi(model, GaussianSampler(mean=np.zeros(2)), 64, 256, seed=4)
        assert abs(est.mean - alpha @ euler_covariance(p, 1.0, 100) @ alpha) <= 4 * est.se

    def test_vpi_dimension_mismatch(self, ou_system):
        model = NeuralSdeModel(system=ou_system, alpha=np.ones(1), T=1.0, L=10)
        with pytest.raises(ValidationError):
            estimate_Vpi(model, GaussianSampler(mean=np.zeros(2)), 4, 4)

    def test_summarize(self):
        est = summarize(np.array([1.0, 2.0, 3.0]), seed=0)
        assert est.mean == 2.0
        assert est.variance == 1.0
        assert est.se == pytest.approx(np.sqrt(1.0 / 3.0))
        assert summarize(np.array([4.0]), 0).variance == 0.0


class TestSamplers:

    def test_gaussian_moments(self):
        s = GaussianSampler(mean=np.array([1.0, 0.0]), scale=2.0)
        assert s.second_moment() == pytest.approx(1.0 + 2 * 4.0)
        assert s.sample(10, np.random.default_rng(0)).shape == (10, 2)

    def test_box_moments_and_support(self):
        s = BoxSampler(lo=np.array([-1.0]), hi=np.array([3.0]))
        pts = s.sample(1000, np.random.default_rng(0))
        assert pts.min() >= -1.0 and pts.max() <= 3.0
        assert s.second_moment() == pytest.approx((1.0 - 3.0 + 9.0) / 3.0)

    def test_from_config(self):
        gaussian = sampler_from_config(SamplerConfig(scale=0.5), 3)
        assert isinstance(gaussian, GaussianSampler)
        assert gaussian.dimension == 3
        box = sampler_from_config(SamplerConfig(kind="box", box=BoxConfig(lo=[0, 0], hi=[1, 1])), 2)
        assert isinstance(box, BoxSampler)
        with pytest.raises(ValidationError):
            sampler_from_config(SamplerConfig(kind="box"), 2)
        with pytest.raises(ValidationError):
            sampler_from_config(SamplerConfig(mean=[0.0]), 2)

    def test_flow_second_moment_trivial(self):
        model = trivial_model(d=2)
        est = flow_second_moment(model, GaussianSampler(mean=np.zeros(2)), 10_000, seed=0, steps=10)
        assert abs(est.mean - 2.0) <= 4 * est.se


class TestMaureyRate:
    """Test the 1/N law."""

    def test_linear_reference_is_euler_mean(self, ou_params):
        model = NeuralSdeModel(system=build_linear_system(ou_params), alpha=np.ones(1), T=1.0, L=10)
        assert linear_reference(model)(np.array([[2.0]]))[0] == pytest.approx(2.0 * 0.9 ** 10)
        with pytest.raises(ValidationError):
            linear_reference(NeuralSdeModel(system=build_rnn_system(random_rnn_params(0, 1)),
                                            alpha=np.ones(1), T=1.0, L=10))

    def test_linear_slope_is_minus_one(self, ou_params):
        model = NeuralSdeModel(system=build_linear_system(ou_params), alpha=np.ones(1), T=1.0, L=50)
        result = maurey_rate_experiment(model, GaussianSampler(mean=np.zeros(1)),
                                        [8, 16, 32, 64, 128, 256], reps=20, seed=0, n_points=8)
        assert result.reference == "linear-closed-form"
        assert result.slope == pytest.approx(-1.0, abs=0.15)
        assert result.spearman == pytest.approx(-1.0, abs=0.2)
        V = euler_covariance(ou_params, 1.0, 50)[0, 0]
        for row in result.rows:
            assert abs(row.scaled - V) <= 4 * row.scaled_se + 0.05 * V

    def test_rows_and_csv(self, ou_params):
        model = NeuralSdeModel(system=build_linear_system(ou_params), alpha=np.ones(1), T=1.0, L=10)
        result = maurey_rate_experiment(model, GaussianSampler(mean=np.zeros(1)), [4, 8], reps=3, n_points=2)
        assert result.csv_header() == ["N", "mse", "se"]
        assert [row[0] for row in result.csv_rows()] == [4, 8]
        data = result.to_dict()
        assert data["rows"][1]["N_times_mse"] == pytest.approx(8 * data["rows"][1]["mse"])

    def test_pilot_reference_for_nonlinear_systems(self, rnn_system):
        model = NeuralSdeModel(system=rnn_system, alpha=np.ones(2), T=1.0, L=10)
        result = maurey_rate_experiment(model, GaussianSampler(mean=np.zeros(2)), [4, 8, 16], reps=4,
                                        n_points=2, seed=1)
        assert result.reference == "pilot"
        assert result.reference_error > 0
        assert result.slope is not None
        assert any("pilot" in note for note in result.notes)

    def test_user_reference(self):
        model = trivial_model(d=1)
        result = maurey_rate_experiment(model, GaussianSampler(mean=np.zeros(1)), [2, 4], reps=2,
                                        n_points=1, reference=lambda pts: pts @ np.ones(1))
        assert result.reference == "user"
        assert result.slope is not None

    @pytest.mark.parametrize("N_list", [[8], [16, 8], [8, 8]])
    def test_invalid_n_list(self, ou_system, N_list):
        model = NeuralSdeModel(system=ou_system, alpha=np.ones(1), T=1.0, L=10)
        with pytest.raises(ValidationError):
            maurey_rate_experiment(model, GaussianSampler(mean=np.zeros(1)), N_list, reps=2)

    @pytest.mark.slow
    def test_acceptance_scale_rate(self, ou_params):
        model = NeuralSdeModel(system=build_linear_system(ou_params), alpha=np.ones(1), T=1.0, L=100)
        sampler = GaussianSampler(mean=np.zeros(1))
        result = maurey_rate_experiment(model, sampler, [8, 16, 32, 64, 128, 256, 512, 1024], reps=50)
        assert result.slope == pytest.approx(-1.0, abs=0.15)
        vpi = estimate_Vpi(model, sampler, 256, 1024, seed=1)
        for row in result.rows:
            assert abs(row.scaled - vpi.mean) <= 3 * (row.scaled_se + vpi.se)


class TestVarianceBound:

    def test_formula(self, ou_system):
        model = NeuralSdeModel(system=ou_system, alpha=np.array([2.0]), T=2.0, L=10)
        # k2 |a|^2 (l1 S / (c2 l0 T))^{1/2} (l1 S / c2 + m2)
        expected = 4.0 * (0.5 / 2.0) ** 0.5 * (0.5 + 3.0)
        assert vpi_upper_bound(model, 0.5, 3.0) == pytest.approx(expected)
        assert vpi_upper_bound(model, 0.5, 3.0, k2=2.0) == pytest.approx(2 * expected)

    def test_rejects_nonpositive_constants(self, ou_system):
        model = NeuralSdeModel(system=ou_system, alpha=np.ones(1), T=1.0, L=10)
        with pytest.raises(ValidationError):
            vpi_upper_bound(model, 0.5, 1.0, c2=0.0)
        with pytest.raises(ValidationError):
            vpi_upper_bound(model, -1.0, 1.0)


class TestLinearizedGaussian:

    def test_linear_system_gives_the_gramian(self):
        p = random_linear_params(12, 2)
        model = NeuralSdeModel(system=build_linear_system(p), alpha=np.ones(2), T=1.0, L=10)
        x = np.array([0.2, -0.4])
        picture = linearized_gaussian(model, x)
        gram = gramian(p, 1.0)
        np.testing.assert_allclose(picture.covariance, gram.W, rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(picture.mean, gram.expTA @ x, rtol=1e-9)
        assert picture.readout_variance(np.ones(2)) == pytest.approx(np.ones(2) @ gram.W @ np.ones(2))
