"""Weighted ERM for linear ITRs with objective perturbation"""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from models.budget import StabilityBudget
from models.dataset import Dataset
from models.privacy import Calibration, PrivacyParams
from models.solution import ErmSolution, ErmSpec
from models.weight_vector import WeightVector
from optim import ConvexProblem, pgd, project_l1_ball
from privacy import calibrate, sample_noise
from stability import budget_for_config, budget_universal
from weights import pin_moment_scale, solve_weights

logger = logging.getLogger(__name__)


class WeightedQuadratic:
    """(1/n) sum w_i (2 y_i a_i - x_i^T theta)^2 + (c/2)||theta||^2 as c0 - h^T theta + theta^T G theta / 2"""

    def __init__(self, dataset: Dataset, weights: WeightVector, spec: ErmSpec):
        w = np.asarray(weights, dtype=float)
        if w.shape[0] != dataset.n:
            raise ValueError(f"{w.shape[0]} weights for a dataset of n={dataset.n}")
        X = dataset.covariates
        targets = 2.0 * dataset.outcomes * dataset.treatments
        n = dataset.n
        self.n = n
        self.p = dataset.p
        self.c0 = float(w @ targets ** 2) / n
        self.G = 2.0 * (X.T * w) @ X / n
        self.h = 2.0 * X.T @ (w * targets) / n
        self.ridge = spec.ridge
        self.lambda_max = float(np.linalg.eigvalsh(self.G).max()) if self.p else 0.0

    def value(self, theta) -> float:
        """Unperturbed objective L(theta; D)"""
        theta = np.asarray(theta, dtype=float)
        return float(self.c0 - self.h @ theta + 0.5 * theta @ self.G @ theta + 0.5 * self.ridge * theta @ theta)

    def problem(self, lambda1: float, gamma_ridge: float = 0.0, noise: Optional[np.ndarray] = None) -> ConvexProblem:
        """Perturbed objective L + (gamma/2)||theta||^2 + <b, theta>/n over the L1 ball"""
        shift = np.zeros(self.p) if noise is None else np.asarray(noise, dtype=float) / self.n
        curvature = self.ridge + gamma_ridge

        def objective(theta):
            G_theta = self.G @ theta
            value = (self.c0 - self.h @ theta + 0.5 * theta @ G_theta
                     + 0.5 * curvature * theta @ theta + shift @ theta)
            return float(value), G_theta - self.h + curvature * theta + shift

        return ConvexProblem(
            dimension=self.p,
            objective=objective,
            projection=lambda theta: project_l1_ball(theta, lambda1),
            smoothness=max(self.lambda_max + curvature, 1e-12),
            name='weighted_erm'
        )


def solve_nonprivate(dataset: Dataset, weights: WeightVector, spec: ErmSpec) -> ErmSolution:
    """argmin over ||theta||_1 <= lambda1 of (1/n) sum w_i l(theta; d_i) + R(theta)"""
    quad = WeightedQuadratic(dataset, weights, spec)
    theta, diag = pgd(quad.problem(spec.lambda1), np.zeros(dataset.p), tol=spec.tol,
                      max_iter=spec.max_iter, accelerated=True)
    return ErmSolution(
        theta=theta,
        objective_nonprivate=quad.value(theta),
        diagnostics=diag,
        lambda1=spec.lambda1,
        calibration_used=None
    )


def _check_calibration(calibration: Calibration, spec: ErmSpec, dataset: Dataset):
    inputs = calibration.inputs
    zeta = inputs.get('zeta')
    if zeta is not None and not math.isclose(zeta, spec.constants.zeta, rel_tol=1e-12):
        raise ValueError(f"calibration was computed for zeta={zeta}, spec has zeta={spec.constants.zeta}")
    n = inputs.get('n')
    if n is not None and n != dataset.n:
        raise ValueError(f"calibration was computed for n={n}, dataset has n={dataset.n}")


def solve_private(dataset: Dataset, weights: WeightVector, spec: ErmSpec, calibration: Calibration,
                  rng: Optional[np.random.Generator] = None, noise: Optional[np.ndarray] = None,
                  gamma_ridge: Optional[float] = None) -> ErmSolution:
    """Objective-perturbed solve; `noise` and `gamma_ridge` override the calibrated draws"""
    _check_calibration(calibration, spec, dataset)
    if noise is None:
        if calibration.noise_scale > 0 and rng is None:
            raise ValueError("a private solve needs an rng to draw the noise vector")
        noise = sample_noise(calibration, dataset.p, rng)
    noise = np.asarray(noise, dtype=float).ravel()
    if noise.shape[0] != dataset.p:
        raise ValueError(f"noise has dimension {noise.shape[0]}, dataset has p={dataset.p}")
    gamma = calibration.gamma_ridge if gamma_ridge is None else float(gamma_ridge)

    quad = WeightedQuadratic(dataset, weights, spec)
    theta, diag = pgd(quad.problem(spec.lambda1, gamma, noise), np.zeros(dataset.p), tol=spec.tol,
                      max_iter=spec.max_iter, accelerated=True)
    return ErmSolution(
        theta=theta,
        objective_nonprivate=quad.value(theta),
        diagnostics=diag,
        lambda1=spec.lambda1,
        calibration_used=calibration,
        noise=noise
    )


def run_dp2erm(dataset: Dataset, scheme_config, spec: ErmSpec, privacy: PrivacyParams,
               rng: Optional[np.random.Generator] = None, budget: Optional[StabilityBudget] = None,
               w_max: Optional[float] = None,
               w_max_factor: float = 2.0) -> Tuple[ErmSolution, WeightVector, Calibration]:
    """Stage 1 weights (non-private), scheme budget, calibration, Stage 2 private solve"""
    scheme_config = pin_moment_scale(scheme_config, dataset, spec.constants.M)
    weights = solve_weights(dataset, scheme_config)
    if budget is None:
        budget = budget_for_config(scheme_config, dataset, spec.constants, weights=weights,
                                   w_max=w_max, w_max_factor=w_max_factor)
    calibration = calibrate(privacy, spec.constants, budget, dataset.n, dataset.p)
    solution = solve_private(dataset, weights, spec, calibration, rng)
    logger.debug(f"DP-2ERM {scheme_config.scheme}/{privacy.mechanism} eps={privacy.epsilon}: {calibration!r}")
    return solution, weights, calibration


def run_composition_baseline(dataset: Dataset, scheme_config, spec: ErmSpec, privacy: PrivacyParams,
                             rng: Optional[np.random.Generator] = None) -> Tuple[ErmSolution, WeightVector, Calibration]:
    """Same pipeline calibrated to the universal (worst-case) budget"""
    return run_dp2erm(dataset, scheme_config, spec, privacy, rng, budget=budget_universal(dataset.n))
