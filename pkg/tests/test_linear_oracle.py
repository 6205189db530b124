"""
Tests for the linear-SDE closed forms.
"""

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.linalg import expm

from tests.factories import random_linear_params

from nsde_bounds.core.exceptions import NumericalError
from nsde_bounds.dynamics import LinearParams
from nsde_bounds.linear import (
    exact_action_linear,
    exact_density_linear,
    gramian,
    log_density_linear,
    optimal_control_linear,
)


def van_loan_gramian(p: LinearParams, T: float) -> np.ndarray:
    """W(T) from one block matrix exponential."""
    d = p.dimension
    block = np.zeros((2 * d, 2 * d))
    block[:d, :d] = -p.A
    block[:d, d:] = p.covariance_rate
    block[d:, d:] = p.A.T
    F = expm(block * T)
    return F[d:, d:].T @ F[:d, d:]


class TestGramian:
    """Test the Lyapunov-ODE Gramian."""

    def test_ou_closed_form(self, ou_params):
        result = gramian(ou_params, 2.0)
        assert result.W[0, 0] == pytest.approx((1 - np.exp(-4.0)) / 2, rel=1e-10)
        assert result.expTA[0, 0] == pytest.approx(np.exp(-2.0), rel=1e-10)
        assert not result.ill_conditioned

    def test_trivial_system_gramian_is_t_identity(self):
        result = gramian(LinearParams(A=np.zeros((3, 3)), G=np.eye(3)), 1.7)
        np.testing.assert_allclose(result.W, 1.7 * np.eye(3), rtol=1e-12)

    @pytest.mark.parametrize("seed,d", [(0, 1), (1, 2), (2, 3), (3, 3)])
    def test_matches_van_loan(self, seed, d):
        p = random_linear_params(seed, d)
        result = gramian(p, 1.0)
        np.testing.assert_allclose(result.W, van_loan_gramian(p, 1.0), rtol=1e-8, atol=1e-12)
        np.testing.assert_allclose(result.expTA, expm(p.A), rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(result.W, result.W.T)

    def test_degenerate_noise_is_flagged(self):
        p = LinearParams(A=np.zeros((2, 2)), G=np.array([[1.0, 0.0], [0.0, 0.0]]))
        result = gramian(p, 1.0)
        assert result.ill_conditioned
        with pytest.raises(NumericalError):
            exact_action_linear(p, [0.0, 0.0], [1.0, 1.0], 1.0, gram=result)

    def test_to_dict(self, ou_params):
        data = gramian(ou_params, 1.0, steps=100).to_dict()
        assert set(data) == {"T", "W", "expTA", "condition", "ill_conditioned"}


class TestExactAction:
    """Test the closed-form action, density and control."""

    def test_trivial_action(self):
        p = LinearParams(A=np.zeros((2, 2)), G=np.eye(2))
        x, y = np.array([1.0, 0.0]), np.array([0.0, 2.0])
        assert exact_action_linear(p, x, y, 0.5) == pytest.approx(5.0 / (2 * 0.5))

    def test_ou_action(self, ou_params):
        T, x, y = 1.0, 0.5, 1.5
        W = (1 - np.exp(-2 * T)) / 2
        expected = (y - np.exp(-T) * x) ** 2 / (2 * W)
        assert exact_action_linear(ou_params, [x], [y], T) == pytest.approx(expected, rel=1e-10)

    def test_action_vanishes_on_the_flow(self):
        p = random_linear_params(5, 2)
        x = np.array([0.3, -1.0])
        assert exact_action_linear(p, x, expm(p.A) @ x, 1.0) == pytest.approx(0.0, abs=1e-16)

    def test_density_integrates_to_one(self, ou_params):
        ys = np.linspace(-6.0, 6.0, 2001)
        gram = gramian(ou_params, 1.0)
        values = [exact_density_linear(ou_params, [0.2], [y], 1.0, gram=gram) for y in ys]
        assert trapezoid(values, ys) == pytest.approx(1.0, abs=1e-8)

    def test_log_density_is_gaussian(self):
        p = random_linear_params(8, 2)
        x, y = np.array([0.1, 0.2]), np.array([1.0, -0.5])
        W = van_loan_gramian(p, 1.0)
        e = y - expm(p.A) @ x
        expected = -0.5 * (2 * np.log(2 * np.pi) + np.log(np.linalg.det(W))) - 0.5 * e @ np.linalg.solve(W, e)
        assert log_density_linear(p, x, y, 1.0) == pytest.approx(expected, rel=1e-7)

    def test_optimal_control_energy_equals_action(self):
        p = random_linear_params(9, 2)
        x, y, T = np.array([0.0, 1.0]), np.array([1.0, 0.0]), 1.0
        times = np.linspace(0.0, T, 2001)
        u = optimal_control_linear(p, x, y, T, times)
        energy = 0.5 * trapezoid(np.sum(u * u, axis=1), times)
        assert energy == pytest.approx(exact_action_linear(p, x, y, T), rel=1e-6)
        assert u.shape == (2001, 2)
