"""Noise scale and ridge calibration for objective perturbation"""
import logging
import math

from models.budget import StabilityBudget
from models.constants import ProblemConstants
from models.privacy import Calibration, PrivacyParams

logger = logging.getLogger(__name__)


def gaussian_l_tilde(p: int, delta: float) -> float:
    """sqrt((sqrt(p) + sqrt(log 1/delta))^2 + log 1/delta)"""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0,1), got {delta}")
    log_inv = math.log(1.0 / delta)
    return math.sqrt((math.sqrt(p) + math.sqrt(log_inv)) ** 2 + log_inv)


def ridge_for(epsilon: float, lam_tr: float, w2_bar: float, n: int) -> float:
    """gamma = 2 lambda W2_bar / (epsilon n)"""
    return 2.0 * lam_tr * w2_bar / (epsilon * n)


def calibrate(privacy: PrivacyParams, constants: ProblemConstants, budget: StabilityBudget,
              n: int, p: int) -> Calibration:
    """Smallest noise scale and ridge meeting the privacy conditions with equality.

    gamma mechanism:    1/beta = 2 zeta W1_bar / eps
    gaussian mechanism: sigma  = (zeta/eps)(L~ + sqrt(L~^2 + eps/(3n))) W1_bar
    both:               gamma  = 2 lambda W2_bar / (eps n)
    """
    if n < 1 or p < 1:
        raise ValueError(f"n and p must be >= 1, got n={n}, p={p}")
    inputs = {
        'epsilon': privacy.epsilon,
        'delta': privacy.delta,
        'zeta': constants.zeta,
        'lam_tr': constants.lam_tr,
        'w1_bar': budget.w1_bar,
        'w2_bar': budget.w2_bar,
        'n': n,
        'p': p,
        'provenance': budget.provenance
    }
    if not privacy.is_private:
        return Calibration.nonprivate(privacy.mechanism, **inputs)

    eps = privacy.epsilon
    gamma_ridge = ridge_for(eps, constants.lam_tr, budget.w2_bar, n)
    if privacy.mechanism == 'gamma':
        noise_scale = 2.0 * constants.zeta * budget.w1_bar / eps
    else:
        if privacy.delta <= 0:
            raise ValueError("the gaussian mechanism requires delta > 0")
        l_tilde = gaussian_l_tilde(p, privacy.delta)
        inputs['l_tilde'] = l_tilde
        noise_scale = (constants.zeta / eps) * (l_tilde + math.sqrt(l_tilde ** 2 + eps / (3.0 * n))) * budget.w1_bar

    calibration = Calibration(privacy.mechanism, noise_scale, gamma_ridge, inputs)
    logger.debug(f"Calibrated {calibration!r} from {budget!r}")
    return calibration
