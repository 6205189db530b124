"""
Tests for control-affine systems, model families and regularity estimates.
"""

import numpy as np
import pytest

from tests.factories import random_rnn_params

from nsde_bounds.config.models import SystemConfig
from nsde_bounds.core.exceptions import SingularDiffusionError
from nsde_bounds.dynamics import (
    ControlAffineSystem,
    LinearParams,
    RnnParams,
    build_linear_system,
    build_rnn_system,
    build_system,
    certified_M,
    check_jacobian,
    estimate_lipschitz,
    estimate_M,
    gershgorin_M_bound,
    gershgorin_M_bound_uniform,
    get_sigmoid,
    matrix_measure,
    network_constants,
    spectral_norm,
    validate_ellipticity,
)
from nsde_bounds.validators import ValidationError


class TestControlAffineSystem:
    """Test the system container."""

    def test_rejects_degenerate_ellipticity(self):
        """Test lambda0 must be positive and at most lambda1."""
        kwargs = dict(dimension=1, drift=lambda x: x, diffusion=lambda x: x[..., None])
        with pytest.raises(ValidationError):
            ControlAffineSystem(lambda0=0.0, lambda1=1.0, **kwargs)
        with pytest.raises(ValidationError):
            ControlAffineSystem(lambda0=2.0, lambda1=1.0, **kwargs)
        with pytest.raises(ValidationError):
            ControlAffineSystem(lambda0=1.0, lambda1=float("inf"), **kwargs)

    def test_batched_evaluation(self, rnn_system):
        x = np.random.default_rng(0).standard_normal((5, 3, 2))
        assert rnn_system.f(x).shape == (5, 3, 2)
        assert rnn_system.g(x).shape == (5, 3, 2, 2)
        assert rnn_system.jac(x).shape == (5, 3, 2, 2)
        np.testing.assert_allclose(rnn_system.a(x[0, 0]), np.eye(2))

    def test_controlled_field(self, ou_system):
        out = ou_system.controlled_field(np.array([2.0]), np.array([0.5]))
        np.testing.assert_allclose(out, [-1.5])

    def test_solve_diffusion(self):
        sys = build_linear_system(LinearParams(A=np.zeros((2, 2)), G=np.diag([2.0, 4.0])))
        np.testing.assert_allclose(sys.solve_diffusion(np.zeros(2), np.array([2.0, 2.0])), [1.0, 0.5])

    def test_solve_diffusion_singular(self):
        sys = ControlAffineSystem(
            dimension=1, drift=lambda x: 0 * x, diffusion=lambda x: x[..., None],
            lambda0=1.0, lambda1=1.0,
        )
        with pytest.raises(SingularDiffusionError):
            sys.solve_diffusion(np.array([0.0]), np.array([1.0]))

    def test_describe(self, ou_system):
        info = ou_system.describe()
        assert info["kind"] == "linear"
        assert info["dimension"] == 1
        assert info["analytic_jacobian"] is True
        assert info["constant_diffusion"] is True


class TestFamilies:
    """Test the linear and RNN families."""

    def test_linear_ellipticity_from_covariance(self):
        sys = build_linear_system(LinearParams(A=np.zeros((2, 2)), G=np.diag([1.0, 3.0])))
        assert sys.lambda0 == pytest.approx(1.0)
        assert sys.lambda1 == pytest.approx(9.0)

    def test_linear_singular_g_rejected(self):
        with pytest.raises(ValidationError, match="singular"):
            build_linear_system(LinearParams(A=np.zeros((2, 2)), G=np.array([[1.0, 1.0], [1.0, 1.0]])))

    def test_rnn_ellipticity_is_c_squared(self):
        sys = build_rnn_system(random_rnn_params(1, 3, c=0.5))
        assert sys.lambda0 == sys.lambda1 == pytest.approx(0.25)

    def test_rnn_jacobian_matches_finite_differences(self):
        for sigmoid in ("tanh", "logistic", "arctan", "softsign"):
            sys = build_rnn_system(random_rnn_params(3, 3, sigmoid=sigmoid))
            assert check_jacobian(sys, -2 * np.ones(3), 2 * np.ones(3), n_points=50) < 1e-6

    def test_rnn_gamma_below_slope_rejected(self):
        with pytest.raises(ValidationError, match="slope bound"):
            RnnParams(tau=1.0, A=np.eye(2), c=1.0, gamma=0.5)

    def test_unknown_sigmoid(self):
        with pytest.raises(ValidationError, match="Unknown sigmoid"):
            get_sigmoid("relu")

    def test_build_system_from_config(self):
        sys = build_system(SystemConfig(kind="linear", A=[[-1.0]]))
        assert sys.kind == "linear"
        np.testing.assert_allclose(sys.g(np.zeros(1)), np.eye(1))

        rnn = build_system(SystemConfig(kind="rnn", dimension=2, c=2.0))
        assert rnn.lambda0 == pytest.approx(4.0)

    def test_build_system_ellipticity_override(self):
        sys = build_system(SystemConfig(kind="linear", A=[[0.0]], lambda0=0.5))
        assert sys.lambda0 == 0.5
        assert sys.lambda1 == pytest.approx(1.0)

    def test_build_system_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            build_system(SystemConfig(kind="linear", A=[[1.0]], dimension=2))


class TestRegularity:
    """Test matrix measure and M(f) estimates."""

    def test_matrix_measure(self):
        assert matrix_measure(np.diag([-1.0, 2.0])) == pytest.approx(2.0)
        # rotation generator: skew part does not contribute
        assert matrix_measure(np.array([[0.0, 1.0], [-1.0, 0.0]])) == pytest.approx(0.0)
        batch = matrix_measure(np.stack([np.eye(2), -np.eye(2)]))
        np.testing.assert_allclose(batch, [1.0, -1.0])

    def test_matrix_measure_bounds_spectral_abscissa(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            A = rng.standard_normal((3, 3))
            assert np.max(np.linalg.eigvals(A).real) <= matrix_measure(A) + 1e-12
            assert matrix_measure(A) <= spectral_norm(A) + 1e-12

    def test_matrix_measure_rejects_non_square(self):
        with pytest.raises(ValueError):
            matrix_measure(np.ones((2, 3)))

    def test_certified_M_linear_is_exact(self):
        A = np.array([[-1.0, 3.0], [0.0, -2.0]])
        sys = build_linear_system(LinearParams(A=A, G=np.eye(2)))
        assert certified_M(sys) == pytest.approx(matrix_measure(A))
        assert estimate_M(sys, [-1, -1], [1, 1], n_samples=10) == pytest.approx(matrix_measure(A))

    def test_gershgorin_dominates_samples(self):
        for seed in range(5):
            p = random_rnn_params(seed, 3)
            sys = build_rnn_system(p)
            sampled = estimate_M(sys, -3 * np.ones(3), 3 * np.ones(3), n_samples=500, seed=seed)
            assert sampled <= gershgorin_M_bound(p) + 1e-12
            assert certified_M(sys) == pytest.approx(gershgorin_M_bound(p))

    def test_gershgorin_contracting_network(self):
        p = RnnParams(tau=1.0, A=np.array([[0.0, 0.3], [0.2, 0.0]]), c=1.0)
        assert gershgorin_M_bound(p) == pytest.approx(-1.0 + 0.25)
        assert gershgorin_M_bound_uniform(1.0, 1.0, 0.0, 0.3, 1) == pytest.approx(-0.7)

    def test_network_constants(self):
        A = np.array([[0.5, -0.2, 0.0], [0.0, -1.0, 0.0], [0.4, 0.0, 0.1]])
        assert network_constants(A) == (0.5, pytest.approx(0.4), 2)
        assert network_constants(-np.eye(2)) == (0.0, 0.0, 0)

    @pytest.mark.parametrize("seed", range(5))
    def test_uniform_bound_covers_gershgorin(self, seed):
        p = random_rnn_params(seed, 4)
        kappa, beta, m = network_constants(p.A)
        assert gershgorin_M_bound(p) <= gershgorin_M_bound_uniform(p.tau, p.gamma, kappa, beta, m) + 1e-12

    def test_certified_M_unknown_family(self):
        sys = ControlAffineSystem(dimension=1, drift=lambda x: np.sin(x), diffusion=lambda x: x[..., None],
                                  lambda0=1.0, lambda1=1.0)
        assert certified_M(sys) is None

    def test_validate_ellipticity(self, rnn_system):
        report = validate_ellipticity(rnn_system, [-1, -1], [1, 1], n_samples=16)
        assert report.ok
        assert report.to_dict()["observed_min"] == pytest.approx(1.0)

    def test_lipschitz_estimate(self):
        value = estimate_lipschitz(lambda x: 2.0 * x, [-1.0], [1.0], n_pairs=50)
        assert value == pytest.approx(2.0)
