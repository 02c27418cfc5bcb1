"""Objective-perturbation calibration and noise samplers"""
from .calibration import calibrate, gaussian_l_tilde, ridge_for
from .noise import sample_gamma_noise, sample_gaussian_noise, sample_noise, expected_noise_norm

__all__ = ['calibrate', 'gaussian_l_tilde', 'ridge_for', 'sample_gamma_noise', 'sample_gaussian_noise', 'sample_noise',
           'expected_noise_norm']
