"""Stage-2 weighted ERM with objective perturbation"""
from .solver import (
    WeightedQuadratic, solve_nonprivate, solve_private, run_dp2erm, run_composition_baseline
)
from .utility import UtilityTrial, utility_gap_trial, loss_gradient_norm, noise_to_signal

__all__ = [
    'WeightedQuadratic', 'solve_nonprivate', 'solve_private', 'run_dp2erm', 'run_composition_baseline',
    'UtilityTrial', 'utility_gap_trial', 'loss_gradient_norm', 'noise_to_signal'
]
