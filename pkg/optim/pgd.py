"""Projected gradient descent with backtracking and optional restarted acceleration"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from models.solution import SolveDiagnostics

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 100_000
MAX_SMOOTHNESS = 1e300
TRACE_EVERY = 1000


class SolverError(RuntimeError):
    """Raised on non-finite evaluations and on non-convergence; carries the diagnostics"""

    def __init__(self, message: str, diagnostics: SolveDiagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class ConvexProblem:
    """min f(x) over a convex set given by its Euclidean projection"""
    dimension: int
    objective: Callable[[np.ndarray], Tuple[float, np.ndarray]]
    projection: Callable[[np.ndarray], np.ndarray]
    smoothness: Optional[float] = None
    name: str = 'problem'

    def evaluate(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        value, grad = self.objective(x)
        return float(value), np.asarray(grad, dtype=float)

    def gradient_mapping_norm(self, x, L: float) -> float:
        """L * ||x - P(x - grad f(x)/L)||"""
        x = np.asarray(x, dtype=float)
        _, g = self.evaluate(x)
        return float(L * np.linalg.norm(x - self.projection(x - g / L)))


def pgd(problem: ConvexProblem, start, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER,
        accelerated: bool = False, raise_on_failure: bool = True,
        trace: Optional[List[float]] = None) -> Tuple[np.ndarray, SolveDiagnostics]:
    """Minimize a smooth convex function over a convex set.

    Step 1/L starting from problem.smoothness (or 1.0), doubling L until the
    sufficient-decrease condition holds. Stops once L * ||x - P(x - grad/L)||
    <= tol at the current iterate. With accelerated=True the step is taken
    from a Nesterov extrapolation that restarts whenever momentum opposes
    progress. `trace` (if given) receives the objective value of every iterate.
    """
    if tol <= 0:
        raise ValueError(f"tol must be > 0, got {tol}")
    x = np.array(start, dtype=float, copy=True).ravel()
    if x.shape[0] != problem.dimension:
        raise ValueError(f"start has dimension {x.shape[0]}, problem has {problem.dimension}")

    L = float(problem.smoothness) if problem.smoothness else 1.0
    if not L > 0 or not math.isfinite(L):
        raise ValueError(f"smoothness must be positive and finite, got {problem.smoothness}")

    backtracks = 0
    iteration = 0

    def diagnostics(gmap: float, value: float, converged: bool, message: str = '') -> SolveDiagnostics:
        return SolveDiagnostics(
            iterations=iteration,
            grad_map_norm=float(gmap),
            objective=float(value),
            converged=converged,
            step=1.0 / L,
            backtracks=backtracks,
            message=message
        )

    def evaluate(point: np.ndarray, gmap: float = math.nan) -> Tuple[float, np.ndarray]:
        value, grad = problem.evaluate(point)
        if not math.isfinite(value) or not np.all(np.isfinite(grad)):
            diag = diagnostics(gmap, value, False, 'non-finite objective or gradient')
            logger.error(f"{problem.name}: non-finite objective/gradient at iteration {iteration}")
            raise SolverError(f"{problem.name}: non-finite objective or gradient at iteration {iteration}", diag)
        return value, grad

    f, g = evaluate(x)
    y, fy, gy = x, f, g
    t = 1.0
    gmap = math.inf

    while True:
        if trace is not None:
            trace.append(f)

        # Stopping test at the current iterate
        stationary = problem.projection(x - g / L)
        gmap = L * float(np.linalg.norm(x - stationary))
        if gmap <= tol:
            diag = diagnostics(gmap, f, True)
            logger.debug(f"{problem.name}: converged {diag!r}")
            return x, diag
        if iteration >= max_iter:
            break
        iteration += 1

        while True:
            x_new = stationary if y is x else problem.projection(y - gy / L)
            f_new, g_new = evaluate(x_new, gmap)
            d = x_new - y
            if f_new <= fy + float(gy @ d) + 0.5 * L * float(d @ d) + 1e-12 * max(1.0, abs(fy)):
                break
            L *= 2.0
            backtracks += 1
            if L > MAX_SMOOTHNESS:
                diag = diagnostics(gmap, f, False, 'step size underflow')
                raise SolverError(f"{problem.name}: backtracking failed to find a descent step", diag)
            stationary = problem.projection(x - g / L)

        if accelerated:
            if float((y - x_new) @ (x_new - x)) > 0:
                t = 1.0
                y, fy, gy = x_new, f_new, g_new
            else:
                t_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
                y = x_new + ((t - 1.0) / t_next) * (x_new - x)
                fy, gy = evaluate(y, gmap)
                t = t_next
        else:
            y, fy, gy = x_new, f_new, g_new

        x, f, g = x_new, f_new, g_new
        if iteration % TRACE_EVERY == 0:
            logger.debug(f"{problem.name}: iter={iteration} f={f:.10g} gmap={gmap:.3g} L={L:.3g}")

    diag = diagnostics(gmap, f, False, f'max_iter={max_iter} reached')
    logger.warning(f"{problem.name}: no convergence after {max_iter} iterations (gmap={gmap:.3g} > tol={tol:.3g})")
    if raise_on_failure:
        raise SolverError(f"{problem.name}: did not converge in {max_iter} iterations", diag)
    return x, diag
