"""Noise calibration and samplers"""
import math

import numpy as np
import pytest
from scipy import stats

from models import Calibration, PrivacyParams, ProblemConstants, StabilityBudget
from privacy import (
    calibrate, expected_noise_norm, gaussian_l_tilde, ridge_for, sample_gamma_noise, sample_gaussian_noise, sample_noise
)
from stability import budget_universal

UNIT_ZETA = ProblemConstants(M=1.0, M_out=None, lambda1=1.0, zeta=1.0, lam_tr=2.0)


def _budget(w1, w2, n):
    return StabilityBudget(w1_bar=w1, w2_bar=w2, scheme='explicit', provenance='explicit', n=n)


# ==================== Calibration ====================

def test_gamma_noise_scale_spot_value():
    calibration = calibrate(PrivacyParams(epsilon=0.1), UNIT_ZETA, _budget(300.0, 300.0, 100), 100, 10)
    assert calibration.noise_scale == pytest.approx(6000.0, rel=1e-12)
    assert calibration.beta == pytest.approx(1 / 6000.0, rel=1e-12)


def test_gamma_ridge_spot_value():
    calibration = calibrate(PrivacyParams(epsilon=1.0), UNIT_ZETA, _budget(1.0, math.sqrt(2.0), 100), 100, 10)
    assert calibration.gamma_ridge == pytest.approx(4 * math.sqrt(2.0) / 100, rel=1e-12)
    assert ridge_for(1.0, 2.0, math.sqrt(2.0), 100) == calibration.gamma_ridge


def test_gaussian_noise_scale_spot_value():
    privacy = PrivacyParams(epsilon=1.0, delta=0.01, mechanism='gaussian')
    calibration = calibrate(privacy, UNIT_ZETA, _budget(1.0, 1.0, 400), 400, 10)
    log_inv = math.log(100.0)
    l_tilde = math.sqrt((math.sqrt(10.0) + math.sqrt(log_inv)) ** 2 + log_inv)
    assert gaussian_l_tilde(10, 0.01) == pytest.approx(l_tilde, rel=1e-12)
    assert l_tilde == pytest.approx(5.7256, abs=1e-4)
    assert calibration.noise_scale == pytest.approx(l_tilde + math.sqrt(l_tilde ** 2 + 1 / 1200), rel=1e-12)
    assert calibration.noise_scale == pytest.approx(11.4515, abs=1e-3)
    assert calibration.inputs['l_tilde'] == pytest.approx(l_tilde)


def test_gaussian_without_delta_is_rejected():
    with pytest.raises(ValueError):
        calibrate(PrivacyParams(epsilon=1.0, delta=0.0, mechanism='gaussian'), UNIT_ZETA,
                  _budget(1.0, 1.0, 10), 10, 2)
    with pytest.raises(ValueError):
        gaussian_l_tilde(3, 0.0)


def test_calibration_monotone_in_epsilon_and_budget():
    budget = budget_universal(50)
    for mechanism, delta in (('gamma', 0.0), ('gaussian', 0.02)):
        scales = [calibrate(PrivacyParams(eps, delta, mechanism), UNIT_ZETA, budget, 50, 3)
                  for eps in (0.01, 0.1, 1.0, 10.0)]
        assert all(a.noise_scale > b.noise_scale for a, b in zip(scales, scales[1:]))
        assert all(a.gamma_ridge > b.gamma_ridge for a, b in zip(scales, scales[1:]))
    small = calibrate(PrivacyParams(1.0), UNIT_ZETA, _budget(2.0, 2.0, 50), 50, 3)
    large = calibrate(PrivacyParams(1.0), UNIT_ZETA, _budget(4.0, 8.0, 50), 50, 3)
    assert small.noise_scale < large.noise_scale and small.gamma_ridge < large.gamma_ridge


def test_infinite_epsilon_is_nonprivate():
    calibration = calibrate(PrivacyParams(math.inf), UNIT_ZETA, budget_universal(20), 20, 3)
    assert calibration.noise_scale == 0.0 and calibration.gamma_ridge == 0.0
    assert calibration.inputs['provenance'] == 'universal'


def test_calibration_echoes_inputs():
    calibration = calibrate(PrivacyParams(0.5), UNIT_ZETA, budget_universal(20), 20, 3)
    for key in ('epsilon', 'delta', 'zeta', 'lam_tr', 'w1_bar', 'w2_bar', 'n', 'p'):
        assert key in calibration.inputs
    assert calibration.to_dict()['input_n'] == 20


# ==================== Samplers ====================

def test_gamma_radii_follow_gamma_law():
    rng = np.random.default_rng(11)
    p, beta = 5, 2.0
    radii = np.array([np.linalg.norm(sample_gamma_noise(p, beta, rng)) for _ in range(10_000)])
    statistic = stats.kstest(radii, stats.gamma(a=p, scale=1 / beta).cdf).statistic
    assert statistic <= 0.02
    se = radii.std(ddof=1) / math.sqrt(radii.size)
    assert abs(radii.mean() - p / beta) <= 4 * se


def test_gamma_directions_are_isotropic():
    rng = np.random.default_rng(12)
    p = 4
    draws = np.array([sample_gamma_noise(p, 1.0, rng) for _ in range(20_000)])
    directions = draws / np.linalg.norm(draws, axis=1, keepdims=True)
    assert np.allclose(directions.T @ directions / draws.shape[0], np.eye(p) / p, atol=0.01)


def test_gamma_noise_vanishes_with_large_beta():
    rng = np.random.default_rng(13)
    assert max(np.linalg.norm(sample_gamma_noise(3, 1e9, rng)) for _ in range(100)) < 1e-6


def test_gaussian_noise_moments():
    rng = np.random.default_rng(14)
    sigma, p, draws = 1.5, 3, 20_000
    samples = np.array([sample_gaussian_noise(p, sigma, rng) for _ in range(draws)])
    variance_se = sigma ** 2 * math.sqrt(2.0 / (draws - 1))
    assert np.all(np.abs(samples.var(axis=0, ddof=1) - sigma ** 2) <= 4 * variance_se)
    assert np.all(np.abs(samples.mean(axis=0)) <= 4 * sigma / math.sqrt(draws))
    squared = np.sum(samples ** 2, axis=1)
    assert abs(squared.mean() - p * sigma ** 2) <= 4 * squared.std(ddof=1) / math.sqrt(draws)


def test_sampler_preconditions():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        sample_gamma_noise(0, 1.0, rng)
    with pytest.raises(ValueError):
        sample_gamma_noise(2, 0.0, rng)
    with pytest.raises(ValueError):
        sample_gaussian_noise(2, -1.0, rng)


def test_noise_is_reproducible():
    calibration = Calibration('gaussian', noise_scale=2.0, gamma_ridge=0.1)
    first = sample_noise(calibration, 4, np.random.default_rng(99))
    second = sample_noise(calibration, 4, np.random.default_rng(99))
    assert np.array_equal(first, second)


def test_zero_noise_scale_draws_nothing():
    rng = np.random.default_rng(5)
    state = rng.bit_generator.state
    assert np.array_equal(sample_noise(Calibration.nonprivate(), 3, rng), np.zeros(3))
    assert rng.bit_generator.state == state


def test_expected_noise_norm():
    assert expected_noise_norm('gamma', 2.5, 4) == pytest.approx(10.0)
    assert expected_noise_norm('gaussian', 3.0, 1) == pytest.approx(3.0 * math.sqrt(2.0 / math.pi))
    assert expected_noise_norm('gaussian', 3.0, 2) == pytest.approx(3.0 * math.sqrt(math.pi / 2.0))
    assert expected_noise_norm('gamma', 0.0, 5) == 0.0
    with pytest.raises(ValueError, match="unknown mechanism"):
        expected_noise_norm('laplace', 1.0, 2)
    with pytest.raises(ValueError):
        expected_noise_norm('gamma', 1.0, 0)
