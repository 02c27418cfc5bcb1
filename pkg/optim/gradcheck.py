"""Finite-difference gradient oracle"""
import numpy as np


def finite_diff_gradient(objective, x, h: float = 1e-5) -> np.ndarray:
    """Central-difference gradient; objective may return a value or a (value, gradient) pair"""
    if h <= 0:
        raise ValueError(f"step h must be > 0, got {h}")

    def value(point):
        out = objective(point)
        return float(out[0] if isinstance(out, tuple) else out)

    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        grad.flat[i] = (value(x + e) - value(x - e)) / (2.0 * h)
    return grad
