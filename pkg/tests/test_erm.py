"""Weighted ERM solves, objective perturbation and utility-gap trials"""
import math

import numpy as np
import pytest

from models import Calibration, Dataset, ErmSpec, IpwConfig, PrivacyParams, ProblemConstants, WeightVector
from erm import (
    WeightedQuadratic, loss_gradient_norm, noise_to_signal, run_composition_baseline, run_dp2erm, solve_nonprivate,
    solve_private, utility_gap_trial
)
from privacy import calibrate
from stability import budget_data_independent, budget_universal


def _spec(p, lambda1=5.0, M_out=3.0):
    return ErmSpec(ProblemConstants.for_itr(M=math.sqrt(p), M_out=M_out, lambda1=lambda1))


# ==================== Non-private solve ====================

def test_unconstrained_solution_is_least_squares(dataset):
    spec = _spec(dataset.p, lambda1=1000.0)
    solution = solve_nonprivate(dataset, WeightVector.uniform(dataset.n), spec)
    X = dataset.covariates
    targets = 2.0 * dataset.outcomes * dataset.treatments
    expected = np.linalg.solve(X.T @ X, X.T @ targets)
    assert solution.diagnostics.converged
    assert np.allclose(solution.theta, expected, atol=1e-5)
    residual = targets - X @ expected
    assert solution.objective_nonprivate == pytest.approx(np.mean(residual ** 2), rel=1e-6)


def test_weighted_objective_matches_direct_sum(dataset, rng):
    raw = rng.uniform(0.2, 2.0, size=dataset.n)
    weights = WeightVector.normalized(raw, 'test')
    quad = WeightedQuadratic(dataset, weights, _spec(dataset.p))
    theta = rng.uniform(-1, 1, size=dataset.p)
    residual = 2.0 * dataset.outcomes * dataset.treatments - dataset.covariates @ theta
    assert quad.value(theta) == pytest.approx(np.mean(weights.weights * residual ** 2), rel=1e-10)


def test_solution_stays_in_l1_ball(dataset):
    spec = _spec(dataset.p, lambda1=0.2)
    solution = solve_nonprivate(dataset, WeightVector.uniform(dataset.n), spec)
    assert np.abs(solution.theta).sum() <= 0.2 + 1e-9
    assert np.abs(solution.theta).sum() == pytest.approx(0.2, rel=1e-6)


def test_weight_length_mismatch(dataset):
    with pytest.raises(ValueError, match="weights"):
        WeightedQuadratic(dataset, WeightVector.uniform(dataset.n - 1), _spec(dataset.p))


# ==================== Private solve ====================

def test_large_epsilon_approaches_nonprivate(dataset, rng):
    spec = _spec(dataset.p)
    weights = WeightVector.uniform(dataset.n)
    calibration = calibrate(PrivacyParams(1e6), spec.constants, budget_universal(dataset.n), dataset.n, dataset.p)
    private = solve_private(dataset, weights, spec, calibration, rng)
    reference = solve_nonprivate(dataset, weights, spec)
    assert private.is_private
    assert np.allclose(private.theta, reference.theta, atol=0.05)


def test_infinite_epsilon_equals_nonprivate(dataset, rng):
    spec = _spec(dataset.p)
    solution, weights, calibration = run_dp2erm(dataset, IpwConfig(lambda_ipw=0.1), spec, PrivacyParams(math.inf), rng)
    reference = solve_nonprivate(dataset, weights, spec)
    assert calibration.noise_scale == 0.0 and calibration.gamma_ridge == 0.0
    assert np.array_equal(solution.theta, reference.theta)
    assert not solution.is_private


def test_minimizer_moves_at_most_noise_over_ridge(dataset, rng):
    spec = _spec(dataset.p)
    weights = WeightVector.uniform(dataset.n)
    calibration = Calibration('gamma', noise_scale=1.0, gamma_ridge=0.5)
    gamma = 0.5
    for _ in range(10):
        b, b_prime = rng.normal(scale=20.0, size=(2, dataset.p))
        theta = solve_private(dataset, weights, spec, calibration, noise=b, gamma_ridge=gamma).theta
        theta_prime = solve_private(dataset, weights, spec, calibration, noise=b_prime, gamma_ridge=gamma).theta
        bound = 2.0 * np.linalg.norm(b - b_prime) / (dataset.n * gamma)
        assert np.linalg.norm(theta - theta_prime) <= bound + 1e-6


def test_private_solve_requires_rng(dataset):
    calibration = Calibration('gamma', noise_scale=1.0, gamma_ridge=0.1)
    with pytest.raises(ValueError, match="rng"):
        solve_private(dataset, WeightVector.uniform(dataset.n), _spec(dataset.p), calibration)


def test_calibration_for_other_data_is_rejected(dataset, rng):
    spec = _spec(dataset.p)
    calibration = calibrate(PrivacyParams(1.0), spec.constants, budget_universal(10), 10, dataset.p)
    with pytest.raises(ValueError, match="n=10"):
        solve_private(dataset, WeightVector.uniform(dataset.n), spec, calibration, rng)
    other = calibrate(PrivacyParams(1.0), _spec(dataset.p, lambda1=1.0).constants,
                      budget_universal(dataset.n), dataset.n, dataset.p)
    with pytest.raises(ValueError, match="zeta"):
        solve_private(dataset, WeightVector.uniform(dataset.n), spec, other, rng)


def test_noise_dimension_checked(dataset):
    with pytest.raises(ValueError, match="dimension"):
        solve_private(dataset, WeightVector.uniform(dataset.n), _spec(dataset.p),
                      Calibration.nonprivate(), noise=np.zeros(dataset.p + 1))


def test_composition_baseline_adds_noise(dataset):
    spec = _spec(dataset.p)
    config = IpwConfig(lambda_ipw=0.1)
    privacy = PrivacyParams(1.0)
    _, _, scheme_calibration = run_dp2erm(dataset, config, spec, privacy, np.random.default_rng(1))
    _, _, baseline_calibration = run_composition_baseline(dataset, config, spec, privacy, np.random.default_rng(1))
    assert baseline_calibration.noise_scale >= scheme_calibration.noise_scale
    assert baseline_calibration.gamma_ridge >= scheme_calibration.gamma_ridge
    assert baseline_calibration.inputs['provenance'] == 'universal'


# ==================== Utility trials ====================

def test_utility_tail_within_bounds(make_dataset, rng):
    dataset = make_dataset(50, 1, rng)
    spec = _spec(1)
    calibration = Calibration('gamma', noise_scale=5.0, gamma_ridge=0.05)
    trial = utility_gap_trial(dataset, WeightVector.uniform(dataset.n), spec, calibration, 200, rng)

    assert trial.threshold > 0
    assert trial.t[0] < trial.threshold
    inapplicable = ~trial.applicable
    assert inapplicable.any() and trial.applicable.any()
    assert np.all(np.isnan(trial.radial_bound[inapplicable]))
    assert np.all(np.isnan(trial.analytic_bound[inapplicable]))

    idx = trial.applicable
    slack = 3.0 * trial.standard_error[idx] + 1e-12
    assert np.all(trial.empirical_tail[idx] <= trial.radial_bound[idx] + slack)
    assert np.all(trial.empirical_tail[idx] <= trial.analytic_bound[idx] + slack)
    assert np.all(np.diff(trial.empirical_tail) <= 0)


def test_gaussian_trial_has_no_closed_form(make_dataset, rng):
    dataset = make_dataset(40, 2, rng)
    calibration = Calibration('gaussian', noise_scale=2.0, gamma_ridge=0.1)
    trial = utility_gap_trial(dataset, WeightVector.uniform(dataset.n), _spec(2), calibration, 100, rng)
    assert np.all(np.isnan(trial.analytic_bound))
    assert np.all(np.isfinite(trial.radial_bound[trial.applicable]))


def test_nonprivate_trial_has_zero_gaps(dataset, rng):
    trial = utility_gap_trial(dataset, WeightVector.uniform(dataset.n), _spec(dataset.p),
                              Calibration.nonprivate(), 100, rng)
    assert np.all(trial.gaps == 0.0)
    assert trial.threshold == 0.0


def test_trial_count_floor(dataset, rng):
    with pytest.raises(ValueError, match="trials"):
        utility_gap_trial(dataset, WeightVector.uniform(dataset.n), _spec(dataset.p),
                          Calibration.nonprivate(), 99, rng)


def test_loss_gradient_norm_hand_example():
    dataset = Dataset(np.array([[1.0, 0.0], [0.0, 1.0]]), [1, -1], np.array([1.0, 2.0]))
    # (2/2) * (x_1 * 2 + x_2 * (-4)) = (2, -4)
    assert loss_gradient_norm(dataset, WeightVector.uniform(2)) == pytest.approx(math.sqrt(20.0))
    assert loss_gradient_norm(dataset, WeightVector(np.array([0.0, 2.0]))) == pytest.approx(8.0)
    with pytest.raises(ValueError):
        loss_gradient_norm(dataset, WeightVector.uniform(3))


def test_noise_to_signal_scales_with_noise():
    base = noise_to_signal('gamma', 10.0, 100, 4, 2.0)
    assert base == pytest.approx(4 * 10.0 / 100 / 2.0)
    assert noise_to_signal('gamma', 30.0, 100, 4, 2.0) == pytest.approx(3.0 * base)
    with pytest.raises(ValueError, match="signal"):
        noise_to_signal('gamma', 10.0, 100, 4, 0.0)


@pytest.mark.slow
def test_utility_gap_shrinks_with_n(make_dataset):
    rng = np.random.default_rng(7)
    spec = _spec(2)
    medians = []
    for n in (100, 400, 1600):
        dataset = make_dataset(n, 2, rng)
        calibration = calibrate(PrivacyParams(1.0), spec.constants, budget_data_independent(1.0, n), n, 2)
        trial = utility_gap_trial(dataset, WeightVector.uniform(n), spec, calibration, 100, rng)
        medians.append(trial.median_gap)
    assert medians[0] > medians[1] > medians[2]
