"""Noise samplers for the perturbation term <b, theta>/n"""
import math

import numpy as np
from scipy.special import gammaln

from models.privacy import Calibration


def sample_gamma_noise(p: int, beta: float, rng: np.random.Generator) -> np.ndarray:
    """Density proportional to exp(-beta ||b||_2): radius ~ Gamma(p, 1/beta) times a uniform direction"""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if not beta > 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    direction = rng.standard_normal(p)
    direction /= np.linalg.norm(direction)
    if math.isinf(beta):
        return np.zeros(p)
    return rng.gamma(shape=p, scale=1.0 / beta) * direction


def sample_gaussian_noise(p: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """i.i.d. N(0, sigma^2) coordinates"""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if not sigma > 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    return sigma * rng.standard_normal(p)


def sample_noise(calibration: Calibration, p: int, rng: np.random.Generator) -> np.ndarray:
    """Draw b for a calibration; zero noise scale gives b = 0 without touching the stream"""
    if calibration.noise_scale == 0:
        return np.zeros(p)
    if calibration.mechanism == 'gamma':
        return sample_gamma_noise(p, 1.0 / calibration.noise_scale, rng)
    return sample_gaussian_noise(p, calibration.noise_scale, rng)


def expected_noise_norm(mechanism: str, noise_scale: float, p: int) -> float:
    """E||b||_2: p / beta for Gamma noise, sigma sqrt(2) Gamma((p+1)/2) / Gamma(p/2) for Gaussian noise"""
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if noise_scale < 0:
        raise ValueError(f"noise scale must be >= 0, got {noise_scale}")
    if mechanism == 'gamma':
        return p * noise_scale
    if mechanism == 'gaussian':
        return noise_scale * math.sqrt(2.0) * math.exp(gammaln((p + 1) / 2.0) - gammaln(p / 2.0))
    raise ValueError(f"unknown mechanism '{mechanism}'")
