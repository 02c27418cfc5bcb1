"""First-order constrained convex solver and projection operators"""
from .pgd import ConvexProblem, SolverError, pgd, DEFAULT_TOL, DEFAULT_MAX_ITER
from .projections import project_l1_ball, project_l2_ball, project_linf_ball, project_capped_simplex
from .gradcheck import finite_diff_gradient

__all__ = [
    'ConvexProblem', 'SolverError', 'pgd', 'DEFAULT_TOL', 'DEFAULT_MAX_ITER',
    'project_l1_ball', 'project_l2_ball', 'project_linf_ball', 'project_capped_simplex',
    'finite_diff_gradient'
]
