"""Sensitivity budgets (W1_bar, W2_bar) feeding the privacy calibration"""
import logging
import math
from typing import Optional

from models.budget import StabilityBudget, universal_w1, universal_w2
from models.configs import IpwConfig, UniformConfig
from models.constants import ProblemConstants
from models.dataset import Dataset
from models.weight_vector import WeightVector
from .bounds import scheme_l2_bound

logger = logging.getLogger(__name__)

DEFAULT_W_MAX_FACTOR = 2.0


def budget_universal(n: int) -> StabilityBudget:
    """W1_bar = 3n, W2_bar = sqrt(6) (n+1)^{3/2}; valid for any weighting scheme"""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return StabilityBudget(w1_bar=universal_w1(n), w2_bar=universal_w2(n), scheme='any', provenance='universal', n=n)


def _capped(scheme: str, w1: float, w2: float, n: int, provenance: str) -> StabilityBudget:
    cap1, cap2 = universal_w1(n), universal_w2(n)
    if not math.isfinite(w1) or not math.isfinite(w2) or w1 >= cap1 or w2 >= cap2:
        provenance = f"{provenance}; capped at universal"
    return StabilityBudget(
        w1_bar=min(w1, cap1) if math.isfinite(w1) else cap1,
        w2_bar=min(w2, cap2) if math.isfinite(w2) else cap2,
        scheme=scheme,
        provenance=provenance,
        n=n
    )


def budget_data_independent(w_max: float, n: int, scheme: str = 'uniform') -> StabilityBudget:
    """Weights that ignore the data: W1_bar = max w_i, W2_bar = sqrt(2) max w_i"""
    if not w_max > 0:
        raise ValueError(f"w_max must be > 0, got {w_max}")
    return _capped(scheme, float(w_max), math.sqrt(2.0) * w_max, n, f"data-independent (w_max={w_max:.6g})")


def budget_from_scheme(scheme: str, l2_bound: float, n: int, w_max: float) -> StabilityBudget:
    """Compose W1_bar, W2_bar from a scheme's L2 perturbation bound B and a max-weight cap:

    W1_bar = sqrt(n) B + w_max, W2_bar = sqrt((B^2 + 2 w_max^2)(1 + n)), both capped at the universal values.
    """
    if l2_bound is None or l2_bound < 0:
        raise ValueError(f"scheme '{scheme}' needs a nonnegative L2 bound, got {l2_bound}")
    if not w_max > 0:
        raise ValueError(f"w_max must be > 0, got {w_max}")
    B = float(l2_bound)
    w1 = math.sqrt(n) * B + w_max
    w2 = math.sqrt((B * B + 2.0 * w_max * w_max) * (1.0 + n)) if math.isfinite(B) else math.inf
    return _capped(scheme, w1, w2, n, f"scheme composition (B={B:.6g}, w_max={w_max:.6g})")


def budget_ipw_randomized(n: int, p0: float, p1: float) -> StabilityBudget:
    """Randomized-trial IPW normalized to sum n, arm flips included.

    With rho = (p0 v p1) / (p0 ^ p1) every weight is at most rho. Replacing one record
    moves its own weight by at most rho and rescales the rest by at most (rho - 1) in L1,
    so W1_bar = 3 rho - 1 and W2_bar = sqrt(((2 rho - 1)^2 + 2 rho^2)(1 + n)).
    """
    for name, value in (('p0', p0), ('p1', p1)):
        if not 0 < value < 1:
            raise ValueError(f"{name} must lie in (0,1), got {value}")
    rho = max(p0, p1) / min(p0, p1)
    l1 = 2.0 * rho - 1.0
    w1 = l1 + rho
    w2 = math.sqrt((l1 * l1 + 2.0 * rho * rho) * (1.0 + n))
    return _capped('ipw', w1, w2, n, f"randomized IPW (rho={rho:.6g})")


def default_w_max(weights: Optional[WeightVector], factor: float = DEFAULT_W_MAX_FACTOR) -> float:
    """Observed max weight times a safety factor, floored at 1"""
    if weights is None:
        return 1.0
    return max(1.0, factor * weights.max)


def budget_for_config(config, dataset: Dataset, constants: ProblemConstants,
                      weights: Optional[WeightVector] = None, w_max: Optional[float] = None,
                      w_max_factor: float = DEFAULT_W_MAX_FACTOR) -> StabilityBudget:
    """Budget of a scheme config at this instance"""
    if isinstance(config, UniformConfig):
        return budget_data_independent(1.0, dataset.n)
    if isinstance(config, IpwConfig) and config.mode == 'randomized':
        return budget_ipw_randomized(dataset.n, config.p0, config.p1)
    if w_max is None:
        w_max = default_w_max(weights, w_max_factor)
    bound = scheme_l2_bound(config, dataset, constants)
    budget = budget_from_scheme(config.scheme, bound, dataset.n, w_max)
    logger.debug(f"Budget for {config.scheme}: {budget!r}")
    return budget
