"""Closed-form weight-stability bounds and empirical sensitivity aggregates"""
import logging
import math
from typing import Iterable, Tuple

import numpy as np

from models.budget import WeightPerturbation
from models.configs import EbwConfig, IpwConfig, MmdConfig, UniformConfig
from models.constants import ProblemConstants
from models.dataset import Dataset
from weights.ebw import EbwDual

logger = logging.getLogger(__name__)

L0_TOL = 1e-10


def empirical_w1_w2(w, w_prime) -> Tuple[float, float, WeightPerturbation]:
    """W1 = ||w-w'||_1 + max(w_i ^ w'_i); W2 = sqrt(||w-w'||_2^2 + 2 max w_i w'_i) sqrt(1 + ||w-w'||_0)"""
    w = np.asarray(w, dtype=float).ravel()
    w_prime = np.asarray(w_prime, dtype=float).ravel()
    if w.shape != w_prime.shape:
        raise ValueError(f"weight vectors differ in length: {w.shape[0]} vs {w_prime.shape[0]}")

    diff = w - w_prime
    perturbation = WeightPerturbation(
        l1=float(np.abs(diff).sum()),
        l2=float(np.linalg.norm(diff)),
        l0=int(np.sum(np.abs(diff) > L0_TOL)),
        max_min=float(np.minimum(w, w_prime).max()),
        max_prod=float((w * w_prime).max())
    )
    w1 = perturbation.l1 + perturbation.max_min
    w2 = math.sqrt(perturbation.l2 ** 2 + 2.0 * perturbation.max_prod) * math.sqrt(1.0 + perturbation.l0)
    return w1, w2, perturbation


# ==================== Per-scheme L2 perturbation bounds ====================

def bound_ipw_randomized(n: int, p0: float, p1: float) -> float:
    """(2/n) ((p0 v p1) / (p0 ^ p1))^2"""
    for name, value in (('p0', p0), ('p1', p1)):
        if not 0 < value < 1:
            raise ValueError(f"{name} must lie in (0,1), got {value}")
    return (2.0 / n) * (max(p0, p1) / min(p0, p1)) ** 2


def bound_ipw_known(p: int, M: float, R: float) -> float:
    """sqrt(5p) e^{MR} M^2 R"""
    if p <= 0 or M <= 0 or R < 0:
        raise ValueError(f"invalid known-propensity bound inputs: p={p}, M={M}, R={R}")
    return math.sqrt(5.0 * p) * math.exp(M * R) * M * M * R


def bound_ipw_estimated(M: float, R: float, lambda_ipw: float, lambda_min: float) -> float:
    """8 M^2 R / (lambda_ipw + lambda_min) (1 + e^{MR}) e^{MR/2}"""
    denominator = lambda_ipw + lambda_min
    if not denominator > 0:
        raise ValueError(f"lambda_ipw + lambda_min must be > 0, got {denominator}")
    return 8.0 * M * M * R / denominator * (1.0 + math.exp(M * R)) * math.exp(M * R / 2.0)


def bound_mmd(R: float, C: float, n: int, lambda_mmd: float) -> float:
    """(12R + 8) C / (n lambda_mmd)"""
    if not lambda_mmd > 0:
        raise ValueError(f"lambda_mmd must be > 0, got {lambda_mmd}")
    return (12.0 * R + 8.0) * C / (n * lambda_mmd)


def bound_ebw(n: int, R: float, r_q: float, lambda_min: float, lambda_ebw: float) -> float:
    """2 (3 e^{R/2} + r_q e^{2.5R}) / sqrt(n), over r_q e^{-2R} lambda_min + lambda_ebw"""
    if r_q < 1:
        raise ValueError(f"r_q must be >= 1, got {r_q}")
    denominator = r_q * math.exp(-2.0 * R) * lambda_min + lambda_ebw
    if not denominator > 0:
        raise ValueError(f"EBW bound denominator must be > 0, got {denominator}")
    return 2.0 * (3.0 * math.exp(R / 2.0) + r_q * math.exp(2.5 * R)) / math.sqrt(n) / denominator


# ==================== Instance constants ====================

def lambda_min_second_moment(X) -> float:
    """Smallest eigenvalue of n^-1 sum x_i x_i^T, clipped at 0"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    return max(float(np.linalg.eigvalsh(X.T @ X / X.shape[0]).min()), 0.0)


def ebw_lambda_min(dataset: Dataset, config: EbwConfig) -> float:
    """lambda_min of n^-1 B^T B for the extended moment matrix B"""
    return lambda_min_second_moment(EbwDual(dataset, config).B)


def base_ratio(q=None) -> float:
    """r_q = max q_i / min q_i (1 for uniform q)"""
    if q is None:
        return 1.0
    q = np.asarray(q, dtype=float)
    return float(q.max() / q.min())


def scheme_l2_bound(config, dataset: Dataset, constants: ProblemConstants) -> float:
    """Closed-form bound on ||w(D) - w(D')||_2 for the scheme config at this instance"""
    n = dataset.n
    if isinstance(config, UniformConfig):
        return 0.0
    if isinstance(config, IpwConfig):
        if config.mode == 'randomized':
            return bound_ipw_randomized(n, config.p0, config.p1)
        if config.mode == 'known_beta':
            return bound_ipw_known(dataset.p, constants.M, config.R)
        lam_min = lambda_min_second_moment(dataset.covariates)
        if config.lambda_ipw + lam_min <= 0:
            return math.inf
        return bound_ipw_estimated(constants.M, config.R, config.lambda_ipw, lam_min)
    if isinstance(config, MmdConfig):
        n0, n1 = dataset.arm_sizes()
        return bound_mmd(config.cap_for(n, min(n0, n1)), config.kernel.C, n, config.lambda_mmd)
    if isinstance(config, EbwConfig):
        # The bound is stated for an L2 ball; an L-inf ball of radius R sits inside the L2 ball of radius R sqrt(dim)
        dual = EbwDual(dataset, config)
        radius = config.R if config.norm == 'l2' else config.R * math.sqrt(dual.dimension)
        lam_min = lambda_min_second_moment(dual.B)
        r_q = base_ratio(config.base_q)
        if r_q * math.exp(-2.0 * radius) * lam_min + config.lambda_ebw <= 0:
            return math.inf
        return bound_ebw(n, radius, r_q, lam_min, config.lambda_ebw)
    raise ValueError(f"no stability bound for config type {type(config).__name__}")


# ==================== General stability principle ====================

def sample_dual_ball(rng: np.random.Generator, dimension: int, radius: float, count: int,
                     norm: str = 'l2') -> np.ndarray:
    """`count` points drawn uniformly from the L2 (or L-inf) ball"""
    if norm == 'linf':
        return rng.uniform(-radius, radius, size=(count, dimension))
    directions = rng.standard_normal((count, dimension))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = radius * rng.uniform(size=(count, 1)) ** (1.0 / dimension)
    return directions * radii


def dual_gradient_shift(dataset: Dataset, dataset_prime: Dataset, config: EbwConfig,
                        lambdas: Iterable[np.ndarray]) -> float:
    """max over the given dual points of ||grad L(lam; D) - grad L(lam; D')||_2"""
    dual = EbwDual(dataset, config)
    dual_prime = EbwDual(dataset_prime, config)
    worst = 0.0
    for lam in lambdas:
        _, g = dual.objective(lam)
        _, g_prime = dual_prime.objective(lam)
        worst = max(worst, float(np.linalg.norm(g - g_prime)))
    return worst
