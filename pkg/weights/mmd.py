"""Kernel MMD balancing weights"""
import logging
from typing import Tuple

import numpy as np

from models.configs import MmdConfig
from models.dataset import Dataset
from models.weight_vector import WeightVector
from optim import ConvexProblem, pgd, project_capped_simplex
from .kernels import kernel_matrix, resolve_bandwidth

logger = logging.getLogger(__name__)


def arm_order(dataset: Dataset) -> Tuple[np.ndarray, np.ndarray]:
    """Row indices of the control arm and of the treated arm, in dataset order"""
    groups = dataset.groups
    return np.flatnonzero(groups == 0), np.flatnonzero(groups == 1)


def mmd_kernel_matrices(dataset: Dataset, config: MmdConfig, bandwidth: float = None) -> Tuple[np.ndarray, np.ndarray]:
    """Quadratic-form data (A, b) of the MMD objective, control block first.

    A = (1/n^2) [[K00 + lam I, (alpha-1) K01], [(alpha-1) K10, K11 + lam I]]
    b = (alpha/n^2) [K0D 1; K1D 1]
    """
    control, treated = arm_order(dataset)
    if control.size == 0 or treated.size == 0:
        raise ValueError("MMD weights need both arms nonempty")
    X = dataset.covariates
    n = dataset.n
    if bandwidth is None:
        bandwidth = resolve_bandwidth(config.kernel, X)

    order = np.concatenate([control, treated])
    K = kernel_matrix(X[order], bandwidth=bandwidth)
    n0 = control.size
    alpha = config.alpha

    A = K.copy()
    A[:n0, n0:] *= (alpha - 1.0)
    A[n0:, :n0] *= (alpha - 1.0)
    A[np.diag_indices(n)] += config.lambda_mmd
    A /= n ** 2

    # K_{D_a, D} 1 is the row sum over all records
    b = (alpha / n ** 2) * K.sum(axis=1)
    return A, b


def mmd_objective(w, A: np.ndarray, b: np.ndarray) -> Tuple[float, np.ndarray]:
    """w^T A w - 2 w^T b and its gradient"""
    w = np.asarray(w, dtype=float)
    Aw = A @ w
    return float(w @ Aw - 2.0 * w @ b), 2.0 * (Aw - b)


def mmd_weights(dataset: Dataset, config: MmdConfig) -> WeightVector:
    """Minimize w^T A w - 2 w^T b with per-arm sums n and 0 <= w_i <= R, then halve"""
    control, treated = arm_order(dataset)
    n = dataset.n
    n0, n1 = control.size, treated.size
    if n0 == 0 or n1 == 0:
        raise ValueError("MMD weights need both arms nonempty")
    cap = config.cap_for(n, min(n0, n1))
    if cap * min(n0, n1) < n * (1 - 1e-12):
        raise ValueError(f"infeasible MMD cap R={cap:.6g}: need R >= n/n_a = {n / min(n0, n1):.6g}")

    bandwidth = resolve_bandwidth(config.kernel, dataset.covariates)
    A, b = mmd_kernel_matrices(dataset, config, bandwidth=bandwidth)

    def project(w):
        return np.concatenate([
            project_capped_simplex(w[:n0], float(n), cap),
            project_capped_simplex(w[n0:], float(n), cap)
        ])

    problem = ConvexProblem(
        dimension=n,
        objective=lambda w: mmd_objective(w, A, b),
        projection=project,
        smoothness=2.0 * float(np.linalg.eigvalsh(A).max()),
        name='mmd_qp'
    )
    start = np.concatenate([np.full(n0, n / n0), np.full(n1, n / n1)])
    solution, diag = pgd(problem, start, tol=config.tol, max_iter=config.max_iter, accelerated=True)

    raw = np.empty(n)
    raw[control] = solution[:n0]
    raw[treated] = solution[n0:]
    capped = int(np.sum(solution >= cap * (1 - 1e-9)))
    if capped:
        logger.warning(f"MMD weights: {capped} weight(s) at the cap R={cap:.4g}")

    return WeightVector(0.5 * raw, scheme='mmd', diagnostics={
        'alpha': config.alpha,
        'lambda_mmd': config.lambda_mmd,
        'cap': cap,
        'bandwidth': bandwidth,
        'kkt_residual': diag.grad_map_norm,
        'iterations': diag.iterations,
        'capped': capped
    })
