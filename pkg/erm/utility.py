"""Monte-Carlo utility-gap trials against the analytic suboptimality tail"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import stats

from models.dataset import Dataset
from models.privacy import Calibration
from models.solution import ErmSpec
from models.weight_vector import WeightVector
from privacy import expected_noise_norm, sample_noise
from .solver import WeightedQuadratic, solve_nonprivate, solve_private

logger = logging.getLogger(__name__)

MIN_TRIALS = 100


@dataclass(frozen=True)
class UtilityTrial:
    """Empirical P(L(theta_priv) >= L(theta_opt) + t) and the analytic bounds at each t.

    `radial_bound` is P(||b|| >= n D_t) under the noise law; `analytic_bound` is
    the closed form exp(-D_t beta n / 2) for Gamma noise. Both are NaN where
    t < (gamma/2)||theta_opt||^2. Gaussian noise has no closed form here (its
    constant is unknown), so `analytic_bound` is NaN throughout.
    """
    t: np.ndarray
    empirical_tail: np.ndarray
    standard_error: np.ndarray
    analytic_bound: np.ndarray
    radial_bound: np.ndarray
    applicable: np.ndarray
    gaps: np.ndarray
    threshold: float
    mechanism: str

    @property
    def median_gap(self) -> float:
        return float(np.median(self.gaps))

    def to_dict(self) -> dict:
        return {
            't': self.t.tolist(),
            'empirical_tail': self.empirical_tail.tolist(),
            'analytic_bound': self.analytic_bound.tolist(),
            'radial_bound': self.radial_bound.tolist(),
            'applicable': self.applicable.tolist(),
            'threshold': self.threshold,
            'mechanism': self.mechanism,
            'median_gap': self.median_gap
        }


def _noise_radius_sf(calibration: Calibration, p: int, radius: float) -> float:
    """P(||b||_2 >= radius)"""
    if calibration.noise_scale == 0:
        return 0.0 if radius > 0 else 1.0
    if calibration.mechanism == 'gamma':
        return float(stats.gamma.sf(radius, a=p, scale=calibration.noise_scale))
    return float(stats.chi.sf(radius / calibration.noise_scale, df=p))


def utility_gap_trial(dataset: Dataset, weights: WeightVector, spec: ErmSpec, calibration: Calibration,
                      trials: int, rng: np.random.Generator, t_grid: Optional[Sequence[float]] = None) -> UtilityTrial:
    """Draw `trials` noise vectors, solve each perturbed problem and tabulate the suboptimality tail"""
    if trials < MIN_TRIALS:
        raise ValueError(f"trials must be >= {MIN_TRIALS}, got {trials}")

    optimum = solve_nonprivate(dataset, weights, spec)
    quad = WeightedQuadratic(dataset, weights, spec)
    gamma = calibration.gamma_ridge
    n, p = dataset.n, dataset.p
    threshold = 0.5 * gamma * float(optimum.theta @ optimum.theta)

    gaps = np.empty(trials)
    for k in range(trials):
        noise = sample_noise(calibration, p, rng)
        solution = solve_private(dataset, weights, spec, calibration, noise=noise)
        # The constrained optimum is a lower bound up to solver tolerance
        gaps[k] = max(quad.value(solution.theta) - optimum.objective_nonprivate, 0.0)

    if t_grid is None:
        top = max(float(gaps.max()), threshold, 1e-12)
        bottom = max(min(threshold, top) / 10.0, top * 1e-6)
        t_grid = np.geomspace(bottom, 10.0 * top, 25)
    t = np.asarray(t_grid, dtype=float)

    empirical = np.array([np.mean(gaps >= ti) for ti in t])
    standard_error = np.sqrt(np.maximum(empirical * (1.0 - empirical), 1.0 / trials) / trials)
    applicable = t >= threshold
    analytic = np.full(t.shape, np.nan)
    radial = np.full(t.shape, np.nan)
    for i, ti in enumerate(t):
        if not applicable[i]:
            continue
        d_t = 0.5 * math.sqrt(max(2.0 * gamma * ti - gamma ** 2 * float(optimum.theta @ optimum.theta), 0.0))
        radial[i] = _noise_radius_sf(calibration, p, n * d_t)
        if calibration.mechanism != 'gamma':
            continue
        if calibration.noise_scale == 0:
            analytic[i] = 0.0 if d_t > 0 else 1.0
        else:
            analytic[i] = math.exp(-d_t * n / (2.0 * calibration.noise_scale))

    logger.info(f"Utility trial: n={n}, trials={trials}, median gap={np.median(gaps):.4g}, threshold={threshold:.4g}")
    return UtilityTrial(
        t=t,
        empirical_tail=empirical,
        standard_error=standard_error,
        analytic_bound=analytic,
        radial_bound=radial,
        applicable=applicable,
        gaps=gaps,
        threshold=threshold,
        mechanism=calibration.mechanism
    )


# ==================== Noise against signal ====================

def loss_gradient_norm(dataset: Dataset, weights: WeightVector) -> float:
    """||grad L(0)||_2 = ||(2/n) sum w_i x_i (2 y_i a_i)||_2, the loss pull the noise term competes with"""
    w = np.asarray(weights, dtype=float)
    if w.shape[0] != dataset.n:
        raise ValueError(f"{w.shape[0]} weights for a dataset of n={dataset.n}")
    targets = 2.0 * dataset.outcomes * dataset.treatments
    return float(np.linalg.norm(2.0 * dataset.covariates.T @ (w * targets) / dataset.n))


def noise_to_signal(mechanism: str, noise_scale: float, n: int, p: int, signal: float) -> float:
    """E||b||/n over the loss gradient norm; the private rule tracks the non-private one only when this is small"""
    if not signal > 0:
        raise ValueError(f"signal must be > 0, got {signal}")
    return expected_noise_norm(mechanism, noise_scale, p) / n / signal
