"""Simulation scenarios"""
import math

import numpy as np
import pytest
from scipy.special import expit

from models import ScenarioSpec
from simgen import (
    assign_treatment, generate, sample_covariates, scenario_constants, treatment_propensity, truth_functions
)


def test_covariates_truncated(rng):
    X = sample_covariates(500, 6, rng)
    assert X.shape == (500, 6)
    assert np.abs(X).max() <= 1.0
    assert abs(X.mean()) < 0.05


def test_propensity_model():
    X = np.zeros((1, 5))
    assert treatment_propensity(X)[0] == pytest.approx(expit(0.05))
    X[0, 0], X[0, 1] = 1.0, 1.0
    assert treatment_propensity(X)[0] == pytest.approx(expit(0.3 - 0.5 + 0.05))
    with pytest.raises(ValueError, match="p >= 2"):
        treatment_propensity(np.zeros((2, 1)))


def test_assign_treatment_coding(rng):
    a, pi1 = assign_treatment(sample_covariates(200, 5, rng), rng)
    assert set(np.unique(a)) <= {-1, 1}
    assert np.all((pi1 > 0) & (pi1 < 1))


def test_linear_contrast():
    model = truth_functions('linear')
    e1 = np.zeros((1, 10))
    e1[0, 0] = 1.0
    assert model.f_opt(e1)[0] == pytest.approx(8.0)
    assert model.f_opt(np.zeros((1, 10)))[0] == pytest.approx(0.0)


def test_tree_contrast_literal_and_threshold_forms():
    X = np.zeros((1, 10))
    X[0, 0] = -0.4
    assert truth_functions('tree', tree_literal=True).f_opt(X)[0] == pytest.approx(0.0)
    assert truth_functions('tree', tree_literal=False).f_opt(X)[0] == pytest.approx(-5.0)


def test_nonlinear_variance_positive(rng):
    model = truth_functions('nonlinear')
    X = sample_covariates(1000, 5, rng)
    for arm in (-1, 1):
        assert np.all(model.sigma2(np.full(1000, arm), X) > 0)


def test_unknown_scenario():
    with pytest.raises(ValueError, match="unknown scenario"):
        truth_functions('quadratic')
    with pytest.raises(ValueError):
        ScenarioSpec(id='quadratic')


def test_scenario_constants():
    constants = scenario_constants(ScenarioSpec(id='linear', p=10), lambda1=5.0)
    assert constants.M == pytest.approx(math.sqrt(10))
    assert constants.M_out == pytest.approx(truth_functions('linear').outcome_bound())
    assert constants.is_itr_consistent()


@pytest.mark.parametrize('scenario', ['linear', 'tree', 'nonlinear'])
def test_noiseless_outcomes_are_exact(scenario, rng):
    spec = ScenarioSpec(id=scenario, n=200, n_test=50, p=6, noise=False)
    train, test = generate(spec, rng)
    model = truth_functions(scenario)
    data = train.dataset
    expected = model.mu(data.covariates) + 0.5 * data.treatments * model.f_opt(data.covariates)
    assert np.allclose(data.outcomes, expected)
    assert np.allclose(train.f_opt, model.f_opt(data.covariates))
    assert test.dataset.n == 50 and test.has_truth
    assert np.all(np.abs(data.outcomes) <= model.outcome_bound())


def test_generated_propensities_match_observed_arm(rng):
    train, _ = generate(ScenarioSpec(n=100, n_test=10, p=5), rng)
    pi1 = treatment_propensity(train.dataset.covariates)
    expected = np.where(train.dataset.treatments == 1, pi1, 1.0 - pi1)
    assert np.allclose(train.pi, expected)


def test_generation_is_deterministic():
    spec = ScenarioSpec(id='nonlinear', n=80, n_test=20, p=5)
    first, _ = generate(spec, np.random.default_rng(42))
    second, _ = generate(spec, np.random.default_rng(42))
    assert first.dataset == second.dataset
