"""Stage-1 covariate balancing weight solvers"""
import logging

from models.configs import IpwConfig, MmdConfig, EbwConfig, UniformConfig
from models.dataset import Dataset
from models.weight_vector import WeightVector
from .ipw import ipw_randomized, ipw_known_beta, ipw_estimated, ipw_weights, logistic_nll
from .mmd import mmd_kernel_matrices, mmd_objective, mmd_weights
from .ebw import EbwDual, ebw_dual_objective, ebw_weights, pin_moment_scale, support_moment_scale
from .kernels import kernel_matrix, median_bandwidth

logger = logging.getLogger(__name__)


def solve_weights(dataset: Dataset, config) -> WeightVector:
    """Run the solver matching a scheme config"""
    if isinstance(config, IpwConfig):
        return ipw_weights(dataset, config)
    if isinstance(config, MmdConfig):
        return mmd_weights(dataset, config)
    if isinstance(config, EbwConfig):
        weights, _ = ebw_weights(dataset, config)
        return weights
    if isinstance(config, UniformConfig):
        return WeightVector.uniform(dataset.n)
    raise ValueError(f"unsupported weighting config: {type(config).__name__}")


__all__ = [
    'solve_weights', 'ipw_randomized', 'ipw_known_beta', 'ipw_estimated', 'ipw_weights', 'logistic_nll',
    'mmd_kernel_matrices', 'mmd_objective', 'mmd_weights', 'EbwDual', 'ebw_dual_objective', 'ebw_weights',
    'pin_moment_scale', 'support_moment_scale', 'kernel_matrix', 'median_bandwidth'
]
