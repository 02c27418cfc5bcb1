"""Covariates, treatment assignment and outcome generation for the simulation scenarios"""
import logging
import math
from typing import Tuple

import numpy as np
from scipy.special import expit

from models.constants import ProblemConstants
from models.dataset import Dataset
from models.experiment import EvalSet, ScenarioSpec
from .scenarios import truth_functions

logger = logging.getLogger(__name__)

LOGIT_X1 = 0.3
LOGIT_X2 = -0.5
LOGIT_INTERCEPT = 0.05


def sample_covariates(n: int, p: int, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. standard normal entries truncated to [-1, 1], by rejection"""
    if n < 1 or p < 1:
        raise ValueError(f"n and p must be >= 1, got n={n}, p={p}")
    size = n * p
    out = np.empty(size)
    filled = 0
    while filled < size:
        k = size - filled
        draws = rng.standard_normal(int(k * 1.5) + 16)
        accepted = draws[np.abs(draws) <= 1.0][:k]
        out[filled:filled + accepted.size] = accepted
        filled += accepted.size
    return out.reshape(n, p)


def treatment_propensity(X: np.ndarray) -> np.ndarray:
    """P(A = 1 | X) = expit(0.3 X1 - 0.5 X2 + 0.05)"""
    X = np.atleast_2d(X)
    if X.shape[1] < 2:
        raise ValueError(f"treatment assignment needs p >= 2, got p={X.shape[1]}")
    return expit(LOGIT_X1 * X[:, 0] + LOGIT_X2 * X[:, 1] + LOGIT_INTERCEPT)


def assign_treatment(X: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Treatments in {-1,+1} and the true P(A = 1 | X)"""
    pi1 = treatment_propensity(X)
    a = np.where(rng.uniform(size=pi1.shape[0]) < pi1, 1, -1)
    return a, pi1


def scenario_constants(spec: ScenarioSpec, lambda1: float) -> ProblemConstants:
    """M = sqrt(p) on the truncated support; M_out from the scenario's analytic range plus 6 sigma"""
    model = truth_functions(spec.id, spec.tree_literal)
    return ProblemConstants.for_itr(M=math.sqrt(spec.p), M_out=model.outcome_bound(), lambda1=lambda1)


def _draw(spec: ScenarioSpec, n: int, rng: np.random.Generator) -> EvalSet:
    model = truth_functions(spec.id, spec.tree_literal)
    X = sample_covariates(n, spec.p, rng)
    a, pi1 = assign_treatment(X, rng)
    mu = model.mu(X)
    f_opt = model.f_opt(X)

    if spec.noise:
        variance = model.sigma2(a, X)
        if np.any(variance <= 0):
            raise ValueError(f"non-positive noise variance in scenario '{spec.id}'")
        noise = np.sqrt(variance) * rng.standard_normal(n)
    else:
        noise = np.zeros(n)
    y = mu + 0.5 * a * f_opt + noise

    # Outcomes are kept within the declared bound M_out
    bound = model.outcome_bound()
    clipped = int(np.sum(np.abs(y) > bound))
    if clipped:
        logger.warning(f"{clipped} outcome(s) clipped to +/-{bound:.4g} in scenario '{spec.id}'")
        y = np.clip(y, -bound, bound)

    return EvalSet(
        dataset=Dataset(X, a, y),
        f_opt=f_opt,
        pi=np.where(a == 1, pi1, 1.0 - pi1),
        mu=mu
    )


def generate(spec: ScenarioSpec, rng: np.random.Generator) -> Tuple[EvalSet, EvalSet]:
    """Training and test draws, each carrying f_opt and the true propensity of the observed arm"""
    train = _draw(spec, spec.n, rng)
    test = _draw(spec, spec.n_test, rng)
    logger.debug(f"Generated scenario '{spec.id}': train {train.dataset!r}, test n={test.dataset.n}")
    return train, test
