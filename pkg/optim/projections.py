"""Euclidean projections onto the feasible sets used by the solvers"""
import logging

import numpy as np

logger = logging.getLogger(__name__)

BISECTION_STEPS = 200
BISECTION_RTOL = 1e-10


def project_l2_ball(x, radius: float) -> np.ndarray:
    """x if ||x||_2 <= radius, else x scaled back onto the sphere"""
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    x = np.asarray(x, dtype=float)
    norm = np.linalg.norm(x)
    if norm <= radius:
        return x.copy()
    return x * (radius / norm)


def project_linf_ball(x, radius: float) -> np.ndarray:
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    return np.clip(np.asarray(x, dtype=float), -radius, radius)


def project_l1_ball(x, radius: float) -> np.ndarray:
    """Projection onto {||v||_1 <= radius} by sort-and-threshold"""
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")
    x = np.asarray(x, dtype=float)
    u = np.abs(x)
    if u.sum() <= radius:
        return x.copy()

    # Largest rho with u_sorted[rho] > (cumsum[rho] - radius) / (rho + 1)
    mu = np.sort(u)[::-1]
    cumsum = np.cumsum(mu)
    ks = np.arange(1, u.size + 1)
    rho = np.nonzero(mu * ks > cumsum - radius)[0][-1]
    threshold = (cumsum[rho] - radius) / (rho + 1.0)
    return np.sign(x) * np.maximum(u - threshold, 0.0)


def project_capped_simplex(x, total: float, cap: float) -> np.ndarray:
    """Projection onto {w : sum(w) = total, 0 <= w_i <= cap}.

    Bisection on the shift mu solving sum(clip(x - mu, 0, cap)) = total,
    bracketed by [min(x) - cap, max(x)].
    """
    x = np.asarray(x, dtype=float)
    if total <= 0:
        raise ValueError(f"total must be > 0, got {total}")
    if cap <= 0 or total > cap * x.size * (1 + 1e-12):
        raise ValueError(f"infeasible capped simplex: total={total} > cap*dim={cap * x.size}")

    lo, hi = float(x.min()) - cap, float(x.max())
    target_tol = BISECTION_RTOL * total
    mu = 0.5 * (lo + hi)
    for _ in range(BISECTION_STEPS):
        mu = 0.5 * (lo + hi)
        s = np.clip(x - mu, 0.0, cap).sum()
        if abs(s - total) <= target_tol:
            break
        if s > total:
            lo = mu
        else:
            hi = mu
    return np.clip(x - mu, 0.0, cap)
