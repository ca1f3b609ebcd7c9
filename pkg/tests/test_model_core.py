"""Tests for closed-form asymptotics."""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import quad
from scipy.stats import norm

from conftest import make_params
from errors import DomainError, UnsupportedCaseError
from model_core import (
    ModelParams,
    ScaleParams,
    asymptotic_exponent,
    bracket_variance,
    decay_ratio,
    exact_ruin_cir,
    gaussian_lower_bound,
    lamperti_forward,
    lamperti_inverse,
    log_gaussian_lower_bound,
    martingale_rate,
    normalize,
    normalized_log,
    normalized_noise,
    theta_bound,
    uses_limit_branch,
)


def _scale(params, K):
    return ScaleParams.for_params(params, K)


class TestParams:
    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(gamma=1.0),
            dict(gamma=0.49),
            dict(sigma=0.0),
            dict(T=0.0),
            dict(T=-1.0),
            dict(mu=math.inf),
        ],
    )
    def test_rejected(self, kwargs):
        with pytest.raises(ValidationError):
            make_params(**kwargs)

    def test_frozen(self, cir_params):
        with pytest.raises(ValidationError):
            cir_params.mu = 1.0

    def test_scale_exponents(self):
        scale = ScaleParams(initial_K=16.0, gamma=0.75)
        assert scale.speed_exponent == 0.5
        assert scale.norm_exponent == 0.25
        assert scale.speed == pytest.approx(4.0)
        assert scale.level == pytest.approx(2.0)

    def test_scale_gamma_mismatch(self, cir_params):
        with pytest.raises(DomainError):
            gaussian_lower_bound(cir_params, ScaleParams(initial_K=1.0, gamma=0.75))


class TestBracketVariance:
    def test_mu_zero(self, cir_params):
        assert bracket_variance(cir_params, 1.0) == pytest.approx(0.25, rel=1e-15)

    def test_at_zero(self):
        assert bracket_variance(make_params(mu=0.3, gamma=0.8), 0.0) == 0.0

    def test_positive_drift_against_quadrature(self):
        params = make_params(mu=0.1)
        expected, _ = quad(lambda s: 0.25 * math.exp(-0.1 * s), 0.0, 1.0, epsabs=1e-14)
        assert bracket_variance(params, 1.0) == pytest.approx(expected, rel=1e-12)
        assert bracket_variance(params, 1.0) == pytest.approx(0.2379065, abs=1e-7)

    def test_increasing(self):
        params = make_params(mu=-0.4, gamma=0.6)
        values = [bracket_variance(params, t) for t in np.linspace(0.0, 1.0, 21)]
        assert all(b > a for a, b in zip(values, values[1:]))

    @pytest.mark.parametrize("t", [-0.1, 1.5])
    def test_outside_horizon(self, cir_params, t):
        with pytest.raises(DomainError):
            bracket_variance(cir_params, t)


class TestLimitBranch:
    @pytest.mark.parametrize("mu", [1e-8, -1e-8])
    @pytest.mark.parametrize("gamma", [0.5, 0.75])
    def test_branch_matches_general_formula(self, mu, gamma):
        params = make_params(mu=mu, gamma=gamma)
        assert uses_limit_branch(params)
        x = 2.0 * params.decay_rate
        general = mu / ((1.0 - gamma) * -math.expm1(-x))
        assert asymptotic_exponent(params) == pytest.approx(general, rel=1e-10)
        assert decay_ratio(x) == pytest.approx(-math.expm1(-x) / x, rel=1e-10)

    @pytest.mark.parametrize("mu", [1e-8, -1e-8])
    def test_continuous_in_mu(self, mu):
        zero = bracket_variance(make_params(gamma=0.75), 1.0)
        near = bracket_variance(make_params(mu=mu, gamma=0.75), 1.0)
        # first-order change |mu (1 - gamma) T| of the exact function
        assert abs(near - zero) / zero <= 1.01 * abs(mu) * 0.25

    def test_decay_ratio_array(self):
        x = np.array([0.0, 1e-9, 1.0, -2.0])
        expected = np.array([1.0, 1.0 - 5e-10, 1.0 - math.exp(-1.0), (math.exp(2.0) - 1.0) / 2.0])
        np.testing.assert_allclose(decay_ratio(x), expected, rtol=1e-14)


class TestExponent:
    @pytest.mark.parametrize(
        "mu, sigma, gamma, expected",
        [
            (0.0, 1.0, 0.5, 2.0),
            (0.1, 1.0, 0.5, 2.10168),
            (0.0, 2.0, 0.75, 2.0),
        ],
    )
    def test_examples(self, mu, sigma, gamma, expected):
        assert asymptotic_exponent(make_params(mu=mu, sigma=sigma, gamma=gamma)) == pytest.approx(
            expected, abs=1e-5
        )

    @pytest.mark.parametrize("mu", [-0.5, 0.0, 0.5])
    def test_theta_bound_at_horizon(self, mu):
        params = make_params(mu=mu, gamma=0.75)
        assert theta_bound(params, 1.0) == pytest.approx(asymptotic_exponent(params), rel=1e-12)

    def test_theta_bound_decreasing(self):
        params = make_params(mu=0.3, gamma=0.6)
        values = [theta_bound(params, th) for th in np.linspace(0.05, 1.0, 20)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_theta_bound_domain(self, cir_params):
        with pytest.raises(DomainError):
            theta_bound(cir_params, 0.0)

    def test_martingale_rate_minimum(self, cev_params):
        exponent = asymptotic_exponent(cev_params)
        assert martingale_rate(cev_params, -1.0) == pytest.approx(exponent, rel=1e-15)
        assert martingale_rate(cev_params, -1.5) > exponent


class TestGaussianLowerBound:
    def test_k1(self, cir_params):
        assert gaussian_lower_bound(cir_params, _scale(cir_params, 1.0)) == pytest.approx(0.022750, abs=1e-6)

    def test_k4(self, cir_params):
        assert gaussian_lower_bound(cir_params, _scale(cir_params, 4.0)) == pytest.approx(3.1671e-5, rel=1e-4)

    def test_large_k(self, cir_params):
        assert gaussian_lower_bound(cir_params, _scale(cir_params, 1e6)) == 0.0

    @pytest.mark.parametrize("mu, gamma", [(0.0, 0.5), (0.3, 0.75), (-0.3, 0.9)])
    def test_decreasing_in_K(self, mu, gamma):
        params = make_params(mu=mu, gamma=gamma)
        values = [gaussian_lower_bound(params, _scale(params, K)) for K in np.geomspace(0.01, 50.0, 25)]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_log_matches(self, cev_params):
        scale = _scale(cev_params, 3.0)
        assert log_gaussian_lower_bound(cev_params, scale) == pytest.approx(
            math.log(gaussian_lower_bound(cev_params, scale)), rel=1e-12
        )

    def test_log_tail_asymptotics(self, cir_params):
        # log Phi(-z) ~ -z^2/2 for large z
        scale = _scale(cir_params, 1e6)
        z = scale.level / math.sqrt(bracket_variance(cir_params, 1.0))
        value = log_gaussian_lower_bound(cir_params, scale)
        assert math.isfinite(value)
        assert value / scale.speed == pytest.approx(-asymptotic_exponent(cir_params), rel=1e-4)
        assert value == pytest.approx(norm.logcdf(-z), rel=1e-10)


class TestExactRuinCir:
    def test_mu_zero(self, cir_params):
        assert exact_ruin_cir(cir_params, _scale(cir_params, 1.0)) == pytest.approx(math.exp(-2.0), rel=1e-14)

    def test_positive_drift(self):
        params = make_params(mu=0.1)
        assert exact_ruin_cir(params, _scale(params, 1.0)) == pytest.approx(0.12226, abs=1e-5)

    def test_small_k(self, cir_params):
        assert exact_ruin_cir(cir_params, _scale(cir_params, 1e-12)) == pytest.approx(1.0)

    @pytest.mark.parametrize("mu", [-0.1, 0.0, 0.1])
    def test_exponent_consistency(self, mu):
        params = make_params(mu=mu)
        p = exact_ruin_cir(params, _scale(params, 3.0))
        assert -math.log(p) / 3.0 == pytest.approx(asymptotic_exponent(params), rel=1e-12)

    def test_requires_square_root(self, cev_params):
        with pytest.raises(UnsupportedCaseError):
            exact_ruin_cir(cev_params, _scale(cev_params, 1.0))


class TestLamperti:
    def test_square_root(self):
        assert lamperti_forward(0.25, 0.5) == pytest.approx(0.5)
        assert lamperti_inverse(0.5, 0.5) == pytest.approx(0.25)

    @pytest.mark.parametrize("gamma", [0.5, 0.6, 0.9])
    def test_fixed_points(self, gamma):
        assert lamperti_forward(1.0, gamma) == 1.0
        assert lamperti_forward(0.0, gamma) == 0.0
        assert lamperti_inverse(0.0, gamma) == 0.0

    def test_arrays(self):
        x = np.array([0.0, 0.5, 2.0])
        np.testing.assert_allclose(lamperti_inverse(lamperti_forward(x, 0.7), 0.7), x, rtol=1e-14)

    @pytest.mark.parametrize("gamma", [0.5, 0.75, 0.9])
    def test_round_trip_random(self, rng, gamma):
        x = rng.uniform(0.0, 1e3, size=10_000)
        np.testing.assert_allclose(lamperti_inverse(lamperti_forward(x, gamma), gamma), x, rtol=1e-12)
        v = lamperti_forward(x, gamma)
        np.testing.assert_allclose(lamperti_forward(lamperti_inverse(v, gamma), gamma), v, rtol=1e-12)

    @pytest.mark.parametrize("gamma", [1.0, 0.4])
    def test_gamma_outside_range(self, gamma):
        with pytest.raises(DomainError):
            lamperti_forward(1.0, gamma)
        with pytest.raises(DomainError):
            lamperti_inverse(1.0, gamma)

    def test_negative_input(self):
        with pytest.raises(DomainError):
            lamperti_forward(-1e-3, 0.5)
        with pytest.raises(DomainError):
            lamperti_inverse(np.array([0.1, -0.1]), 0.5)


class TestNormalization:
    def test_normalized_log(self, cev_params):
        scale = _scale(cev_params, 16.0)
        assert normalized_log(math.exp(-8.0), scale) == pytest.approx(-2.0)
        assert normalized_log(0.0, scale) is None

    def test_normalize(self, cir_params):
        scale = _scale(cir_params, 4.0)
        np.testing.assert_allclose(normalize(np.array([4.0, 2.0, 0.0]), scale), [1.0, 0.5, 0.0])

    def test_noise(self):
        params = ModelParams(mu=0.0, sigma=2.0, gamma=0.75, horizon_T=1.0)
        assert normalized_noise(params, _scale(params, 16.0)) == pytest.approx(1.0)
