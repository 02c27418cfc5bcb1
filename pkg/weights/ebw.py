"""Entropy balancing weights through the convex dual"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.special import logsumexp, softmax

from models.configs import EbwConfig
from models.dataset import Dataset
from models.weight_vector import WeightVector
from optim import ConvexProblem, pgd, project_l2_ball, project_linf_ball

logger = logging.getLogger(__name__)

MOMENT_TOL = 1e-6


def moment_features(dataset: Dataset, config: EbwConfig) -> np.ndarray:
    """g(x_i) = (1, g_1(x_i), ..., g_K(x_i)), unscaled"""
    G = config.moment_matrix(dataset.covariates)
    return np.hstack([np.ones((dataset.n, 1)), G])


def default_moment_scale(dataset: Dataset, config: EbwConfig) -> float:
    """Largest s with (n / min(n0, n1)) * ||s g(x_i)||_2 <= 1 for every row"""
    n0, n1 = dataset.arm_sizes()
    if min(n0, n1) == 0:
        raise ValueError("entropy balancing needs both arms nonempty")
    max_norm = float(np.linalg.norm(moment_features(dataset, config), axis=1).max())
    return min(n0, n1) / (dataset.n * max_norm)


def support_moment_scale(dataset: Dataset, config: EbwConfig, M: Optional[float] = None) -> float:
    """Scale s with (n / min(n0', n1')) ||s g(x)||_2 <= 1 for this dataset and every neighbour.

    ||(1, g(x))|| is bounded over ||x||_2 <= M (first moments by sqrt(1 + M^2),
    with squares by sqrt(1 + M^2 + M^4)); a neighbour loses at most one record
    from the smaller arm. Custom moments have no support bound, so the observed
    maximum is used instead.
    """
    n0, n1 = dataset.arm_sizes()
    if min(n0, n1) == 0:
        raise ValueError("entropy balancing needs both arms nonempty")
    observed = float(np.linalg.norm(moment_features(dataset, config), axis=1).max())
    if M is None:
        M = float(np.linalg.norm(dataset.covariates, axis=1).max())
    if config.moments is not None:
        logger.warning("Custom EBW moments: scale taken from the observed moment norms")
        max_norm = observed
    elif config.include_squares:
        max_norm = max(math.sqrt(1.0 + M ** 2 + M ** 4), observed)
    else:
        max_norm = max(math.sqrt(1.0 + M ** 2), observed)
    return max(min(n0, n1) - 1, 1) / (dataset.n * max_norm)


def pin_moment_scale(config, dataset: Dataset, M: Optional[float] = None):
    """Fix an EBW config's moment scale once so that D and its neighbours share one dual family"""
    if not isinstance(config, EbwConfig) or config.moment_scale is not None:
        return config
    return config.with_overrides(moment_scale=support_moment_scale(dataset, config, M))


class EbwDual:
    """Convex dual of the entropy balancing problem for one dataset.

    Dual variable lam = (lam_0, lam_1), each of length K+1. Row i of the
    extended matrix B is (n/n_a) s g(x_i) placed in the block of its arm a.
    """

    def __init__(self, dataset: Dataset, config: EbwConfig):
        n0, n1 = dataset.arm_sizes()
        if min(n0, n1) == 0:
            raise ValueError("entropy balancing needs both arms nonempty")
        n = dataset.n
        self.n = n
        self.arm_sizes = (n0, n1)
        self.config = config
        self.scale = config.moment_scale if config.moment_scale is not None else default_moment_scale(dataset, config)

        g = self.scale * moment_features(dataset, config)
        self.g = g
        k1 = g.shape[1]
        self.block = k1

        groups = dataset.groups
        B = np.zeros((n, 2 * k1))
        control = groups == 0
        B[control, :k1] = (n / n0) * g[control]
        B[~control, k1:] = (n / n1) * g[~control]
        self.B = B
        self.groups = groups

        g_bar = g.mean(axis=0)
        self.g_bar = g_bar
        self.g_bar_stacked = np.concatenate([g_bar, g_bar])

        if config.base_q is None:
            q = np.full(n, 1.0 / n)
        else:
            q = np.asarray(config.base_q, dtype=float).ravel()
            if q.shape[0] != n:
                raise ValueError(f"base_q has length {q.shape[0]}, dataset has n={n}")
        self.q = q
        self.log_q = np.log(q)

    @property
    def dimension(self) -> int:
        return 2 * self.block

    @property
    def smoothness(self) -> float:
        """Hessian of log C is a covariance of the rows of B, bounded by max ||b_i||^2"""
        return float(np.max(np.sum(self.B ** 2, axis=1))) + self.config.lambda_ebw

    def objective(self, lam) -> Tuple[float, np.ndarray]:
        """log C(lam) - <lam_0 + lam_1, g_bar> + (lambda_ebw/2)||lam||^2 and its gradient"""
        lam = np.asarray(lam, dtype=float)
        scores = self.log_q + self.B @ lam
        value = float(logsumexp(scores) - lam @ self.g_bar_stacked + 0.5 * self.config.lambda_ebw * lam @ lam)
        pi = softmax(scores)
        grad = self.B.T @ pi - self.g_bar_stacked + self.config.lambda_ebw * lam
        return value, grad

    def weights(self, lam) -> np.ndarray:
        """w_i = (n/C) q_i exp((n/n_a) <lam_a, g(x_i)>)"""
        return self.n * softmax(self.log_q + self.B @ np.asarray(lam, dtype=float))

    def project(self, lam) -> np.ndarray:
        if self.config.norm == 'linf':
            return project_linf_ball(lam, self.config.R)
        return project_l2_ball(lam, self.config.R)

    def moment_residual(self, w) -> float:
        """max over arms and moments of |(1/n_a) sum_{i in arm a} w_i g_r(x_i) - g_bar_r|, unscaled units"""
        w = np.asarray(w, dtype=float)
        worst = 0.0
        for arm, n_a in enumerate(self.arm_sizes):
            mask = self.groups == arm
            balanced = (w[mask] @ self.g[mask]) / n_a
            worst = max(worst, float(np.max(np.abs(balanced - self.g_bar))))
        return worst / self.scale


def ebw_dual_objective(lam, dataset: Dataset, config: EbwConfig) -> Tuple[float, np.ndarray]:
    return EbwDual(dataset, config).objective(lam)


def ebw_weights(dataset: Dataset, config: EbwConfig) -> Tuple[WeightVector, np.ndarray]:
    """Solve the dual from 0 over the norm ball of radius R and recover the primal weights"""
    dual = EbwDual(dataset, config)
    problem = ConvexProblem(
        dimension=dual.dimension,
        objective=dual.objective,
        projection=dual.project,
        smoothness=dual.smoothness,
        name='ebw_dual'
    )
    lam_star, diag = pgd(problem, np.zeros(dual.dimension), tol=config.tol, max_iter=config.max_iter, accelerated=True)

    raw = dual.weights(lam_star)
    residual = dual.moment_residual(raw)
    boundary = float(np.linalg.norm(lam_star, ord=np.inf if config.norm == 'linf' else 2)) >= config.R * (1 - 1e-9)
    if config.lambda_ebw == 0 and residual > MOMENT_TOL:
        logger.warning(
            f"EBW moment residual {residual:.3g} above {MOMENT_TOL:g}"
            + (" (dual constraint active)" if boundary else "")
        )

    weights = WeightVector.normalized(raw, scheme='ebw', diagnostics={
        'lambda_star': lam_star,
        'moment_scale': dual.scale,
        'moment_residual': residual,
        'dual_at_boundary': boundary,
        'iterations': diag.iterations,
        'grad_map_norm': diag.grad_map_norm
    })
    return weights, lam_star
