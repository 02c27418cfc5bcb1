"""Inverse probability weights: randomized trial, known and estimated logistic propensities"""
import logging
from typing import Tuple

import numpy as np
from scipy.special import expit

from models.configs import IpwConfig
from models.dataset import Dataset
from models.weight_vector import WeightVector
from optim import ConvexProblem, pgd, project_l2_ball

logger = logging.getLogger(__name__)

EXP_CLAMP = 50.0


def clamped_inverse_propensity(scores: np.ndarray) -> Tuple[np.ndarray, int]:
    """1 + exp(-s) with s clamped to [-50, 50]; returns the weights and the clamp count"""
    scores = np.asarray(scores, dtype=float)
    clamped = int(np.sum(np.abs(scores) > EXP_CLAMP))
    if clamped:
        logger.warning(f"{clamped} propensity exponent(s) clamped to +/-{EXP_CLAMP:g}")
    return 1.0 + np.exp(-np.clip(scores, -EXP_CLAMP, EXP_CLAMP)), clamped


def ipw_randomized(dataset: Dataset, p0: float, p1: float) -> WeightVector:
    """w_i = C / p_{a_i}, C normalizing the sum to n"""
    for name, value in (('p0', p0), ('p1', p1)):
        if not 0 < value < 1:
            raise ValueError(f"{name} must lie in (0,1), got {value}")
    raw = np.where(dataset.groups == 1, 1.0 / p1, 1.0 / p0)
    return WeightVector.normalized(raw, scheme='ipw', diagnostics={'mode': 'randomized', 'p0': p0, 'p1': p1})


def ipw_known_beta(dataset: Dataset, beta_star, R: float = None) -> WeightVector:
    """w_i proportional to 1 + exp(-<x_i, beta*>)"""
    beta_star = np.asarray(beta_star, dtype=float).ravel()
    if beta_star.shape[0] != dataset.p:
        raise ValueError(f"beta_star has dimension {beta_star.shape[0]}, dataset has p={dataset.p}")
    if R is not None and np.linalg.norm(beta_star) > R * (1 + 1e-12):
        raise ValueError(f"||beta_star||_2={np.linalg.norm(beta_star):.6g} exceeds R={R}")

    raw, clamped = clamped_inverse_propensity(dataset.covariates @ beta_star)
    return WeightVector.normalized(raw, scheme='ipw', diagnostics={'mode': 'known_beta', 'clamped': clamped})


def logistic_nll(lam, X: np.ndarray, groups: np.ndarray, lambda_ipw: float = 0.0) -> Tuple[float, np.ndarray]:
    """(1/n) sum [log(1 + e^{x.lam}) - a x.lam] + (lambda_ipw/2)||lam||^2 and its gradient"""
    lam = np.asarray(lam, dtype=float)
    n = X.shape[0]
    z = X @ lam
    value = float(np.sum(np.logaddexp(0.0, z) - groups * z) / n + 0.5 * lambda_ipw * lam @ lam)
    grad = X.T @ (expit(z) - groups) / n + lambda_ipw * lam
    return value, grad


def ipw_estimated(dataset: Dataset, config: IpwConfig) -> Tuple[WeightVector, np.ndarray]:
    """Fit the ridge-penalized logistic propensity over ||lam||_2 <= R, then weight by 1 + exp(-<x_i, lam_hat>)"""
    X = dataset.covariates
    groups = dataset.groups.astype(float)
    n = dataset.n

    # Logistic NLL Hessian is bounded by X^T X / (4n)
    smoothness = float(np.linalg.eigvalsh(X.T @ X / n).max()) / 4.0 + config.lambda_ipw
    problem = ConvexProblem(
        dimension=dataset.p,
        objective=lambda lam: logistic_nll(lam, X, groups, config.lambda_ipw),
        projection=lambda lam: project_l2_ball(lam, config.R),
        smoothness=max(smoothness, 1e-12),
        name='ipw_logistic'
    )
    lam_hat, diag = pgd(problem, np.zeros(dataset.p), tol=config.tol, max_iter=config.max_iter, accelerated=True)

    raw, clamped = clamped_inverse_propensity(X @ lam_hat)
    weights = WeightVector.normalized(raw, scheme='ipw', diagnostics={
        'mode': 'estimated',
        'lambda_hat': lam_hat,
        'clamped': clamped,
        'iterations': diag.iterations,
        'grad_map_norm': diag.grad_map_norm
    })
    logger.debug(f"IPW estimated: ||lambda_hat||={np.linalg.norm(lam_hat):.4g} after {diag.iterations} iterations")
    return weights, lam_hat


def ipw_weights(dataset: Dataset, config: IpwConfig) -> WeightVector:
    """Dispatch on config.mode"""
    if config.mode == 'randomized':
        return ipw_randomized(dataset, config.p0, config.p1)
    if config.mode == 'known_beta':
        return ipw_known_beta(dataset, config.beta_star, config.R)
    weights, _ = ipw_estimated(dataset, config)
    return weights
