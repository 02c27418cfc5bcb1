"""Privacy parameter and calibration data models"""
import math
from dataclasses import dataclass, field
from typing import Any, Dict

MECHANISMS = ('gamma', 'gaussian')


@dataclass(frozen=True)
class PrivacyParams:
    """(epsilon, delta) target and noise mechanism; epsilon may be inf (non-private)"""
    epsilon: float
    delta: float = 0.0
    mechanism: str = 'gamma'

    def __post_init__(self):
        if self.mechanism not in MECHANISMS:
            raise ValueError(f"unknown mechanism '{self.mechanism}', expected one of {MECHANISMS}")
        if math.isnan(self.epsilon) or not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if self.mechanism == 'gamma' and self.delta != 0:
            raise ValueError(f"the gamma mechanism is pure epsilon-DP; delta must be 0, got {self.delta}")
        if self.mechanism == 'gaussian' and not 0 < self.delta < 1:
            raise ValueError(f"the gaussian mechanism requires delta in (0,1), got {self.delta}")

    @property
    def is_private(self) -> bool:
        return math.isfinite(self.epsilon)

    @classmethod
    def from_dict(cls, data: dict) -> 'PrivacyParams':
        return cls(
            epsilon=float(data['epsilon']),
            delta=float(data.get('delta') or 0.0),
            mechanism=data.get('mechanism') or 'gamma'
        )

    def to_dict(self) -> dict:
        return {'epsilon': self.epsilon, 'delta': self.delta, 'mechanism': self.mechanism}


@dataclass(frozen=True)
class Calibration:
    """Noise scale (1/beta or sigma) and ridge gamma, with the inputs that produced them"""
    mechanism: str
    noise_scale: float
    gamma_ridge: float
    inputs: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def nonprivate(cls, mechanism: str = 'gamma', **inputs) -> 'Calibration':
        return cls(mechanism=mechanism, noise_scale=0.0, gamma_ridge=0.0, inputs=dict(inputs))

    @property
    def beta(self) -> float:
        """Gamma-mechanism rate 1/noise_scale"""
        return math.inf if self.noise_scale == 0 else 1.0 / self.noise_scale

    def to_dict(self) -> dict:
        return {
            'mechanism': self.mechanism,
            'noise_scale': self.noise_scale,
            'gamma_ridge': self.gamma_ridge,
            **{f"input_{k}": v for k, v in self.inputs.items()}
        }

    def __repr__(self) -> str:
        return f"Calibration({self.mechanism}, noise_scale={self.noise_scale:.6g}, gamma={self.gamma_ridge:.6g})"
