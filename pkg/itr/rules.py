"""Squared ITR loss, linear decision rules and their evaluation"""
import logging
from typing import Dict, Tuple

import numpy as np
from sklearn.linear_model import LogisticRegression

from models.dataset import Dataset, Record
from models.experiment import EvalSet
from models.rule import DecisionRule, EvalReport, sign_pos

logger = logging.getLogger(__name__)


def itr_loss(theta, record: Record) -> Tuple[float, np.ndarray]:
    """(2ya - x^T theta)^2 and its gradient -2(2ya - x^T theta) x"""
    theta = np.asarray(theta, dtype=float)
    residual = 2.0 * record.y * record.a - float(record.x @ theta)
    return residual ** 2, -2.0 * residual * record.x


def itr_targets(dataset: Dataset) -> np.ndarray:
    """Regression targets 2 y_i a_i"""
    return 2.0 * dataset.outcomes * dataset.treatments


def decide(rule: DecisionRule, x) -> int:
    """sign(x^T theta), 0 -> +1"""
    return int(sign_pos(float(np.asarray(x, dtype=float) @ rule.theta)))


def accuracy(rule: DecisionRule, X, f_opt) -> float:
    """Fraction of points where the rule agrees with sign(f_opt), sign(0) -> +1"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    f_opt = np.asarray(f_opt, dtype=float).ravel()
    if X.shape[0] != f_opt.shape[0]:
        raise ValueError(f"length mismatch: {X.shape[0]} covariate rows, {f_opt.shape[0]} contrasts")
    if f_opt.shape[0] == 0:
        raise ValueError("accuracy of an empty test set is undefined")
    return float(np.mean(rule.decisions(X) == sign_pos(f_opt)))


def empirical_value(rule: DecisionRule, dataset: Dataset, pi) -> float:
    """(1/n) sum y_i 1{a_i = d(x_i)} / pi(a_i, x_i)"""
    pi = np.asarray(pi, dtype=float).ravel()
    if pi.shape[0] != dataset.n:
        raise ValueError(f"length mismatch: {dataset.n} records, {pi.shape[0]} propensities")
    if np.any(pi <= 0):
        raise ValueError(f"propensities must be > 0 (min={pi.min():.3g})")
    agree = rule.decisions(dataset.covariates) == dataset.treatments
    return float(np.mean(dataset.outcomes * agree / pi))


def constant_rule_accuracy(f_opt) -> Dict[str, float]:
    """Accuracy of treating everyone and of treating no one"""
    truth = sign_pos(np.asarray(f_opt, dtype=float).ravel())
    treat_all = float(np.mean(truth == 1))
    return {'treat_all': treat_all, 'treat_none': 1.0 - treat_all}


def evaluate(rule: DecisionRule, eval_set: EvalSet) -> EvalReport:
    """Accuracy (when truth is known) and IPW value on a held-out set"""
    acc = accuracy(rule, eval_set.dataset.covariates, eval_set.f_opt) if eval_set.has_truth else None
    value = empirical_value(rule, eval_set.dataset, eval_set.pi) if eval_set.pi is not None else float('nan')
    return EvalReport(accuracy=acc, empirical_value=value, n_test=eval_set.dataset.n)


def estimate_propensity(dataset: Dataset) -> np.ndarray:
    """Logistic-regression estimate of pi(a_i, x_i) for the observed arms"""
    groups = dataset.groups
    if groups.min() == groups.max():
        raise ValueError("propensity estimation needs both arms present")
    model = LogisticRegression(C=1e6, max_iter=1000)
    model.fit(dataset.covariates, groups)
    pi1 = model.predict_proba(dataset.covariates)[:, 1]
    logger.info(f"Estimated propensities by logistic regression: range [{pi1.min():.3f}, {pi1.max():.3f}]")
    return np.where(dataset.treatments == 1, pi1, 1.0 - pi1)
