"""Gaussian RBF kernel matrices and the median-distance bandwidth heuristic"""
import logging
import math

import numpy as np
from scipy.spatial.distance import pdist
from sklearn.metrics.pairwise import rbf_kernel

from models.configs import KernelSpec

logger = logging.getLogger(__name__)


def median_bandwidth(X) -> float:
    """Median of the positive pairwise Euclidean distances (1.0 if there are none)"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[0] < 2:
        return 1.0
    distances = pdist(X)
    distances = distances[distances > 0]
    if distances.size == 0:
        return 1.0
    return float(np.median(distances))


def resolve_bandwidth(spec: KernelSpec, X) -> float:
    if spec.bandwidth is not None:
        return float(spec.bandwidth)
    bandwidth = median_bandwidth(X)
    logger.debug(f"RBF bandwidth from median heuristic: {bandwidth:.6g}")
    return bandwidth


def kernel_matrix(X, Y=None, bandwidth: float = 1.0) -> np.ndarray:
    """K(x, y) = exp(-||x - y||^2 / (2 bandwidth^2)); an infinite bandwidth gives K = 1"""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
    if math.isinf(bandwidth):
        return np.ones((X.shape[0], Y.shape[0]))
    return rbf_kernel(X, Y, gamma=1.0 / (2.0 * bandwidth ** 2))
