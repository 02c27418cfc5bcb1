"""Weight vector data model"""
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

SUM_RTOL = 1e-8


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative length-n weights summing to n (within 1e-8 * n)"""
    weights: np.ndarray
    scheme: str = 'uniform'
    diagnostics: Dict[str, Any] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True).ravel()
        n = w.shape[0]
        if n == 0:
            raise ValueError("empty weight vector")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise ValueError(f"negative weight: min={w.min():.3g}")
        if abs(w.sum() - n) > SUM_RTOL * n:
            raise ValueError(f"weights sum to {w.sum():.12g}, expected {n}")
        w.setflags(write=False)
        object.__setattr__(self, 'weights', w)

    @classmethod
    def normalized(cls, raw, scheme: str, diagnostics: Dict[str, Any] = None) -> 'WeightVector':
        """Rescale nonnegative raw weights so they sum to n"""
        raw = np.asarray(raw, dtype=float).ravel()
        total = raw.sum()
        if not np.isfinite(total) or total <= 0:
            raise ValueError(f"cannot normalize weights with total {total}")
        return cls(raw * (raw.shape[0] / total), scheme=scheme, diagnostics=dict(diagnostics or {}))

    @classmethod
    def uniform(cls, n: int) -> 'WeightVector':
        return cls(np.ones(n), scheme='uniform')

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def max(self) -> float:
        return float(self.weights.max())

    def __len__(self) -> int:
        return self.n

    def __array__(self, dtype=None, copy=None):
        if copy:
            return np.array(self.weights, dtype=dtype, copy=True)
        return np.asarray(self.weights, dtype=dtype)

    def to_dict(self) -> dict:
        return {
            'scheme': self.scheme,
            'weights': self.weights.tolist(),
            'diagnostics': {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self.diagnostics.items()}
        }

    def __repr__(self) -> str:
        return f"WeightVector(scheme={self.scheme}, n={self.n}, max={self.max:.4g})"
