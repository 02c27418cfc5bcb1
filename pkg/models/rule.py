"""Linear decision rule and evaluation report models"""
from dataclasses import dataclass
from typing import Optional

import numpy as np


def sign_pos(values) -> np.ndarray:
    """Elementwise sign with sign(0) -> +1"""
    return np.where(np.asarray(values, dtype=float) >= 0, 1, -1)


@dataclass(frozen=True)
class DecisionRule:
    """d(x) = sign(x^T theta), ties resolved to +1"""
    theta: np.ndarray

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float, copy=True).ravel()
        theta.setflags(write=False)
        object.__setattr__(self, 'theta', theta)

    def scores(self, X) -> np.ndarray:
        return np.atleast_2d(np.asarray(X, dtype=float)) @ self.theta

    def decisions(self, X) -> np.ndarray:
        return sign_pos(self.scores(X))

    def negated(self) -> 'DecisionRule':
        return DecisionRule(-self.theta)

    def __repr__(self) -> str:
        return f"DecisionRule(theta={np.array2string(self.theta, precision=4)})"


@dataclass(frozen=True)
class EvalReport:
    """Test-split metrics; accuracy is None when no truth column is available"""
    accuracy: Optional[float]
    empirical_value: float
    n_test: int

    def __post_init__(self):
        if self.accuracy is not None and not 0.0 <= self.accuracy <= 1.0:
            raise ValueError(f"accuracy must lie in [0,1], got {self.accuracy}")

    def to_dict(self) -> dict:
        return {'accuracy': self.accuracy, 'value': self.empirical_value, 'n_test': self.n_test}
