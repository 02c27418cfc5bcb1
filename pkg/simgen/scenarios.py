"""Outcome models of the three simulation scenarios"""
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from models.experiment import SCENARIOS

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ScenarioModel:
    """Treatment-free effect mu(X), optimal contrast f_opt(X) and noise variance sigma2(A, X)"""
    id: str
    mu: ArrayFn
    f_opt: ArrayFn
    sigma2: Callable[[np.ndarray, np.ndarray], np.ndarray]
    mu_bound: float
    half_contrast_bound: float
    sigma_max: float

    def outcome_bound(self, noise_sds: float = 6.0) -> float:
        """sup |mu| + sup |f_opt|/2 + noise_sds * sup sigma"""
        return self.mu_bound + self.half_contrast_bound + noise_sds * self.sigma_max


def _quadratic_sum(X: np.ndarray) -> np.ndarray:
    """sum_{j<=5} {X_j + (2/3)(2 X_j^2 - 1)}"""
    head = X[:, :5]
    return np.sum(head + (2.0 / 3.0) * (2.0 * head ** 2 - 1.0), axis=1)


# On [-1, 1] each summand of _quadratic_sum lies in [-0.854, 5/3]
QUADRATIC_SUM_MAX = 5.0 * 5.0 / 3.0


def _linear_f_opt(X):
    return 8.0 * X[:, 0] - 8.0 * X[:, 1] + 4.0 * X[:, 2] + 8.0 * X[:, 3]


def _constant_variance(value: float):
    def sigma2(A, X):
        return np.full(np.asarray(X).shape[0], value)
    return sigma2


def _tree_f_opt(literal: bool) -> ArrayFn:
    def f_opt(X):
        x1, x4 = X[:, 0], X[:, 3]
        second = (2.0 * x1 < -0.5) if literal else (x1 < -0.5)
        return (6.0 * (x1 > -0.5) * np.sign(x1 - 0.5)
                + 5.0 * second * np.sign(x4 + 0.5)
                + 1.0)
    return f_opt


def _nonlinear_mu(X):
    x1, x2, x3, x4, x5 = (X[:, j] for j in range(5))
    return (2.0 + 3.0 * x1 + 2.0 * x2 + 3.0 * x4 - 2.5 * x4 ** 2 - 1.5 * x5 ** 2
            + 2.0 * x1 * x2 + 2.0 * np.exp(-x1 * x2) + np.sin(x3))


def _nonlinear_f_opt(X):
    x4, x5 = X[:, 3], X[:, 4]
    return -0.5 - 2.0 * x4 + x4 ** 2 + 2.5 * x5 ** 2


def _nonlinear_sigma2(A, X):
    A = np.asarray(A)
    x2, x3, x4 = X[:, 1], X[:, 2], X[:, 3]
    return (0.25 + 2.0 * x2 * (x2 > 0)
            + x3 * ((x3 > 0) & (A == 1))
            + x4 * ((x4 > 0) & (A == -1)))


def truth_functions(scenario_id: str, tree_literal: bool = True) -> ScenarioModel:
    """Exact (mu, f_opt, sigma2) of a scenario, with analytic bounds over X in [-1,1]^p"""
    if scenario_id == 'linear':
        return ScenarioModel(
            id='linear',
            mu=lambda X: -0.1 * _quadratic_sum(X),
            f_opt=_linear_f_opt,
            sigma2=_constant_variance(2.0),
            mu_bound=0.1 * QUADRATIC_SUM_MAX,
            half_contrast_bound=14.0,
            sigma_max=math.sqrt(2.0)
        )
    if scenario_id == 'tree':
        return ScenarioModel(
            id='tree',
            mu=lambda X: -3.0 * _quadratic_sum(X),
            f_opt=_tree_f_opt(tree_literal),
            sigma2=_constant_variance(2.0),
            mu_bound=3.0 * QUADRATIC_SUM_MAX,
            half_contrast_bound=5.0,
            sigma_max=math.sqrt(2.0)
        )
    if scenario_id == 'nonlinear':
        return ScenarioModel(
            id='nonlinear',
            mu=_nonlinear_mu,
            f_opt=_nonlinear_f_opt,
            sigma2=_nonlinear_sigma2,
            mu_bound=2.0 + 3.0 + 2.0 + 3.0 + 2.5 + 1.5 + 2.0 + 2.0 * math.e + math.sin(1.0),
            half_contrast_bound=2.5,
            sigma_max=math.sqrt(3.25)
        )
    raise ValueError(f"unknown scenario '{scenario_id}', expected one of {', '.join(SCENARIOS)}")
