"""Solver diagnostics, weighted-ERM problem and solution models"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import ProblemConstants
from .privacy import Calibration

LOSSES = ('itr_squared',)
REGULARIZERS = ('none', 'ridge')
L1_SLACK = 1e-9


@dataclass(frozen=True)
class SolveDiagnostics:
    """Outcome of one projected-gradient solve"""
    iterations: int
    grad_map_norm: float
    objective: float
    converged: bool
    step: float = 0.0
    backtracks: int = 0
    message: str = ''

    def to_dict(self) -> dict:
        return {
            'iterations': self.iterations,
            'grad_map_norm': self.grad_map_norm,
            'objective': self.objective,
            'converged': self.converged,
            'step': self.step,
            'backtracks': self.backtracks,
            'message': self.message
        }

    def __repr__(self) -> str:
        state = 'converged' if self.converged else 'NOT converged'
        return f"SolveDiagnostics({state}, iter={self.iterations}, gmap={self.grad_map_norm:.3g}, f={self.objective:.6g})"


@dataclass(frozen=True)
class ErmSpec:
    """Stage-2 problem: loss id, L1-ball constraint of radius constants.lambda1, optional ridge R(theta)"""
    constants: ProblemConstants
    loss: str = 'itr_squared'
    regularizer: str = 'none'
    reg_coef: float = 0.0
    tol: float = 1e-8
    max_iter: int = 100_000

    def __post_init__(self):
        if self.loss not in LOSSES:
            raise ValueError(f"unknown loss '{self.loss}', expected one of {LOSSES}")
        if self.regularizer not in REGULARIZERS:
            raise ValueError(f"unknown regularizer '{self.regularizer}', expected one of {REGULARIZERS}")
        if self.regularizer == 'ridge' and self.reg_coef < 0:
            raise ValueError(f"ridge coefficient must be >= 0, got {self.reg_coef}")
        if self.loss == 'itr_squared' and not self.constants.is_itr_consistent():
            raise ValueError(
                f"constants inconsistent with the squared ITR loss: {self.constants!r} "
                "(expected zeta = 2M^2 lambda1 + 4 M M_out, lam_tr = 2M^2)"
            )

    @property
    def lambda1(self) -> float:
        return self.constants.lambda1

    @property
    def ridge(self) -> float:
        """Coefficient c of R(theta) = (c/2)||theta||^2, zero when unregularized"""
        return self.reg_coef if self.regularizer == 'ridge' else 0.0

    def with_lambda1(self, lambda1: float) -> 'ErmSpec':
        return ErmSpec(
            constants=self.constants.with_lambda1(lambda1),
            loss=self.loss,
            regularizer=self.regularizer,
            reg_coef=self.reg_coef,
            tol=self.tol,
            max_iter=self.max_iter
        )

    def to_dict(self) -> dict:
        return {
            'loss': self.loss,
            'regularizer': self.regularizer,
            'reg_coef': self.reg_coef,
            **self.constants.to_dict()
        }


@dataclass(frozen=True)
class ErmSolution:
    """Stage-2 parameter with its unperturbed objective value and audit trail"""
    theta: np.ndarray
    objective_nonprivate: float
    diagnostics: SolveDiagnostics
    lambda1: float
    calibration_used: Optional[Calibration] = None
    noise: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float, copy=True).ravel()
        if np.abs(theta).sum() > self.lambda1 + L1_SLACK:
            raise ValueError(f"theta leaves the L1 ball: ||theta||_1={np.abs(theta).sum():.12g} > {self.lambda1}")
        theta.setflags(write=False)
        object.__setattr__(self, 'theta', theta)

    @property
    def is_private(self) -> bool:
        return self.calibration_used is not None and self.calibration_used.noise_scale > 0

    def to_dict(self) -> dict:
        return {
            'theta': self.theta.tolist(),
            'objective_nonprivate': self.objective_nonprivate,
            'lambda1': self.lambda1,
            'diagnostics': self.diagnostics.to_dict(),
            'calibration': None if self.calibration_used is None else self.calibration_used.to_dict()
        }

    def __repr__(self) -> str:
        return f"ErmSolution(p={self.theta.shape[0]}, objective={self.objective_nonprivate:.6g}, private={self.is_private})"
