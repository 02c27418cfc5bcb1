"""Closed-form stability bounds, realized perturbations and budgets"""
import math

import numpy as np
import pytest

from models import (
    Dataset, EbwConfig, IpwConfig, KernelSpec, MmdConfig, ProblemConstants, Record, UniformConfig, WeightVector
)
from models.dataset import make_neighbor
from stability import (
    bound_ebw, bound_ipw_randomized, budget_data_independent, budget_for_config, budget_from_scheme,
    budget_ipw_randomized, budget_universal, default_w_max, dual_gradient_shift, empirical_w1_w2, sample_dual_ball,
    scheme_l2_bound
)
from weights import EbwDual, ebw_weights, ipw_randomized, pin_moment_scale, solve_weights
from weights.ebw import default_moment_scale

NEIGHBOR_PAIRS = 200
SOLVER_SLACK = 1e-6


def _random_record(p, rng, arm=None):
    a = arm if arm is not None else int(rng.choice([-1, 1]))
    return Record(rng.uniform(-1.0, 1.0, size=p), a, float(rng.uniform(-3.0, 3.0)))


def _neighbors(dataset, rng, count=NEIGHBOR_PAIRS, same_arm=False):
    for _ in range(count):
        index = int(rng.integers(dataset.n))
        arm = int(dataset.treatments[index]) if same_arm else None
        pair = make_neighbor(dataset, index, _random_record(dataset.p, rng, arm))
        n0, n1 = pair.perturbed.arm_sizes()
        if min(n0, n1) > 0:
            yield pair


# ==================== Universal and composed budgets ====================

def test_universal_budget_values():
    budget = budget_universal(4)
    assert budget.w1_bar == 12.0
    assert budget.w2_bar == pytest.approx(math.sqrt(6.0) * 5 ** 1.5, rel=1e-12)
    assert budget.w2_bar == pytest.approx(27.39, abs=5e-3)
    single = budget_universal(1)
    assert single.w1_bar == 3.0
    assert single.w2_bar == pytest.approx(6.93, abs=5e-3)
    assert budget_universal(10).w1_bar == 10 * budget_universal(1).w1_bar
    assert budget.provenance == 'universal' and budget.is_universal


def test_universal_budget_needs_records():
    with pytest.raises(ValueError):
        budget_universal(0)


def test_budget_from_randomized_ipw_bound():
    B = bound_ipw_randomized(100, 0.5, 0.5)
    assert B == pytest.approx(0.02)
    budget = budget_from_scheme('ipw', B, 100, w_max=1.0)
    assert budget.w1_bar == pytest.approx(1.2)
    assert budget.w2_bar == pytest.approx(math.sqrt((B ** 2 + 2.0) * 101))
    assert 'capped' not in budget.provenance


def test_randomized_ipw_budget_covers_arm_flips():
    budget = budget_ipw_randomized(100, 0.2, 0.8)
    assert budget.w1_bar == pytest.approx(11.0)
    assert budget.w2_bar == pytest.approx(9.0 * math.sqrt(101.0))
    assert budget.provenance == 'randomized IPW (rho=4)'
    assert budget_ipw_randomized(100, 0.5, 0.5).w1_bar == pytest.approx(2.0)
    with pytest.raises(ValueError):
        budget_ipw_randomized(100, 0.0, 0.5)


def test_budget_for_config_dispatches_randomized_ipw(dataset):
    config = IpwConfig(mode='randomized', p0=0.3, p1=0.6)
    budget = budget_for_config(config, dataset, None)
    assert budget.provenance.startswith('randomized IPW')
    assert budget.w1_bar == pytest.approx(3.0 * 2.0 - 1.0)


def test_large_scheme_bound_falls_back_to_universal():
    for B in (1e9, math.inf):
        budget = budget_from_scheme('mmd', B, 50, w_max=2.0)
        assert budget.w1_bar == budget_universal(50).w1_bar
        assert budget.w2_bar == budget_universal(50).w2_bar
        assert 'capped at universal' in budget.provenance


def test_budget_from_scheme_rejects_missing_bound():
    with pytest.raises(ValueError):
        budget_from_scheme('ipw', None, 10, w_max=1.0)


def test_data_independent_budget():
    budget = budget_data_independent(1.5, 10)
    assert budget.w1_bar == 1.5
    assert budget.w2_bar == pytest.approx(math.sqrt(2.0) * 1.5)
    uniform = budget_for_config(UniformConfig(), Dataset(np.zeros((3, 1)), [1, -1, 1], np.zeros(3)), None)
    assert uniform.w1_bar == 1.0 and uniform.provenance.startswith('data-independent')


def test_default_w_max():
    assert default_w_max(None) == 1.0
    assert default_w_max(WeightVector(np.array([0.2, 1.8]))) == pytest.approx(3.6)
    assert default_w_max(WeightVector(np.array([0.4, 0.4, 0.4, 2.8])), factor=0.1) == 1.0


# ==================== EBW closed form ====================

def test_ebw_bound_arithmetic():
    assert bound_ebw(16, 0.0, 1.0, 1.0, 0.0) == pytest.approx(2.0)
    assert bound_ebw(64, 1.0, 1.0, 0.5, 0.1) == pytest.approx(0.5 * bound_ebw(16, 1.0, 1.0, 0.5, 0.1))
    values = [bound_ebw(100, 1.0, 1.0, 0.2, lam) for lam in (0.0, 0.1, 1.0, 10.0)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_ebw_bound_preconditions():
    with pytest.raises(ValueError, match="r_q"):
        bound_ebw(10, 1.0, 0.5, 1.0, 0.0)
    with pytest.raises(ValueError, match="denominator"):
        bound_ebw(10, 1.0, 1.0, 0.0, 0.0)


# ==================== Realized perturbations ====================

def test_empirical_aggregates_of_identical_vectors():
    w = np.array([0.5, 2.5, 1.0])
    w1, w2, perturbation = empirical_w1_w2(w, w)
    assert w1 == 2.5
    assert w2 == pytest.approx(math.sqrt(2.0) * 2.5)
    assert perturbation.l0 == 0


def test_empirical_aggregates_ignore_sub_tolerance_differences():
    w = np.array([1.0, 1.0])
    _, _, perturbation = empirical_w1_w2(w, w + np.array([1e-12, 0.0]))
    assert perturbation.l0 == 0


@pytest.mark.parametrize('n', [50, 200])
def test_randomized_ipw_neighbors(make_dataset, rng, n):
    dataset = make_dataset(n, 3, rng)
    bound = bound_ipw_randomized(dataset.n, 0.3, 0.7)
    base = ipw_randomized(dataset, 0.3, 0.7).weights
    for pair in _neighbors(dataset, rng, same_arm=True):
        shifted = ipw_randomized(pair.perturbed, 0.3, 0.7).weights
        assert np.linalg.norm(base - shifted) <= bound + SOLVER_SLACK
    for pair in _neighbors(dataset, rng, count=20):
        equal = ipw_randomized(pair.perturbed, 0.4, 0.4).weights
        assert np.linalg.norm(ipw_randomized(dataset, 0.4, 0.4).weights - equal) <= SOLVER_SLACK


def _ebw_config(dataset):
    # Fixed scaling so D and D' share one dual problem family
    return EbwConfig(lambda_ebw=0.1, moment_scale=0.8 * default_moment_scale(dataset, EbwConfig()))


@pytest.mark.slow
@pytest.mark.parametrize('n', [50, 200])
@pytest.mark.parametrize('scheme', ['ipw_known', 'ipw_estimated', 'ebw'])
def test_realized_perturbation_within_bound(make_dataset, rng, n, scheme):
    p = 3
    dataset = make_dataset(n, p, rng)
    constants = ProblemConstants.for_itr(M=math.sqrt(p), M_out=3.0, lambda1=5.0)
    if scheme == 'ipw_known':
        config = IpwConfig(mode='known_beta', beta_star=[0.5, -0.3, 0.2], R=1.0)
    elif scheme == 'ipw_estimated':
        config = IpwConfig(R=1.0, lambda_ipw=0.1)
    else:
        config = _ebw_config(dataset)

    bound = scheme_l2_bound(config, dataset, constants)
    base = solve_weights(dataset, config).weights
    checked = 0
    for pair in _neighbors(dataset, rng):
        shifted = solve_weights(pair.perturbed, config).weights
        assert np.linalg.norm(base - shifted) <= bound + SOLVER_SLACK
        checked += 1
    assert checked >= NEIGHBOR_PAIRS * 0.95


@pytest.mark.slow
@pytest.mark.parametrize('n', [50, 200])
def test_mmd_realized_perturbation_within_bound(make_dataset, rng, n):
    dataset = make_dataset(n, 3, rng)
    constants = ProblemConstants.for_itr(M=math.sqrt(3.0), M_out=3.0, lambda1=5.0)
    config = MmdConfig(kernel=KernelSpec(bandwidth=1.0))
    bound = scheme_l2_bound(config, dataset, constants)
    base = solve_weights(dataset, config).weights
    for pair in _neighbors(dataset, rng):
        shifted = solve_weights(pair.perturbed, config).weights
        assert np.linalg.norm(base - shifted) <= bound + SOLVER_SLACK


def _flip(dataset, index):
    return Record(dataset.covariates[index], -int(dataset.treatments[index]), float(dataset.outcomes[index]))


def test_support_moment_scale_holds_on_every_neighbor(make_dataset, rng):
    p = 3
    dataset = make_dataset(40, p, rng)
    config = pin_moment_scale(EbwConfig(), dataset, math.sqrt(p))
    assert config.moment_scale <= default_moment_scale(dataset, EbwConfig())
    pairs = list(_neighbors(dataset, rng, count=50))
    pairs += [make_neighbor(dataset, i, _flip(dataset, i)) for i in range(dataset.n)]
    for pair in pairs:
        if min(pair.perturbed.arm_sizes()) == 0:
            continue
        rows = EbwDual(pair.perturbed, config).B
        assert np.linalg.norm(rows, axis=1).max() <= 1.0 + 1e-12


def test_pin_moment_scale_keeps_explicit_scale(dataset):
    explicit = EbwConfig(moment_scale=0.01)
    assert pin_moment_scale(explicit, dataset) is explicit
    ipw = IpwConfig()
    assert pin_moment_scale(ipw, dataset) is ipw


@pytest.mark.slow
@pytest.mark.parametrize('n', [50, 200])
def test_ebw_run_scale_perturbation_within_bound(make_dataset, rng, n):
    p = 3
    dataset = make_dataset(n, p, rng)
    constants = ProblemConstants.for_itr(M=math.sqrt(p), M_out=3.0, lambda1=5.0)
    config = pin_moment_scale(EbwConfig(lambda_ebw=0.1), dataset, constants.M)
    bound = scheme_l2_bound(config, dataset, constants)
    base = solve_weights(dataset, config).weights
    checked = 0
    for pair in _neighbors(dataset, rng):
        shifted = solve_weights(pair.perturbed, config).weights
        assert np.linalg.norm(base - shifted) <= bound + SOLVER_SLACK
        checked += 1
    assert checked >= NEIGHBOR_PAIRS * 0.95


def test_dual_solution_shift_bounded_by_gradient_shift(make_dataset, rng):
    dataset = make_dataset(30, 2, rng)
    config = _ebw_config(dataset).with_overrides(lambda_ebw=0.5)
    _, lam_star = ebw_weights(dataset, config)
    for pair in _neighbors(dataset, rng, count=10):
        _, lam_prime = ebw_weights(pair.perturbed, config)
        sample = list(sample_dual_ball(rng, lam_star.size, config.R, 100)) + [lam_star, lam_prime]
        shift = dual_gradient_shift(dataset, pair.perturbed, config, sample)
        assert np.linalg.norm(lam_star - lam_prime) <= 2.0 / config.lambda_ebw * shift + SOLVER_SLACK


def test_dual_ball_samples_stay_inside(rng):
    points = sample_dual_ball(rng, 4, 2.0, 500)
    assert np.linalg.norm(points, axis=1).max() <= 2.0 + 1e-12
    cube = sample_dual_ball(rng, 4, 2.0, 500, norm='linf')
    assert np.abs(cube).max() <= 2.0


def test_scheme_budget_never_exceeds_universal(dataset, constants):
    for config in (IpwConfig(), MmdConfig(), EbwConfig(), UniformConfig()):
        weights = solve_weights(dataset, config)
        budget = budget_for_config(config, dataset, constants, weights=weights)
        universal = budget_universal(dataset.n)
        assert budget.w1_bar <= universal.w1_bar and budget.w2_bar <= universal.w2_bar
