"""Weight-stability budget data models"""
import math
from dataclasses import dataclass


def universal_w1(n: int) -> float:
    return 3.0 * n


def universal_w2(n: int) -> float:
    return math.sqrt(6.0) * (n + 1) ** 1.5


@dataclass(frozen=True)
class StabilityBudget:
    """Worst-case sensitivity aggregates (W1_bar, W2_bar) of a weighting scheme"""
    w1_bar: float
    w2_bar: float
    scheme: str
    provenance: str
    n: int

    def __post_init__(self):
        for name, value in (('w1_bar', self.w1_bar), ('w2_bar', self.w2_bar)):
            if not math.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive and finite, got {value}")
        slack = 1 + 1e-12
        if self.w1_bar > universal_w1(self.n) * slack or self.w2_bar > universal_w2(self.n) * slack:
            raise ValueError(f"budget ({self.w1_bar:.6g}, {self.w2_bar:.6g}) exceeds the universal bound at n={self.n}")

    @property
    def is_universal(self) -> bool:
        return self.w1_bar >= universal_w1(self.n) and self.w2_bar >= universal_w2(self.n)

    def to_dict(self) -> dict:
        return {
            'w1_bar': self.w1_bar,
            'w2_bar': self.w2_bar,
            'scheme': self.scheme,
            'provenance': self.provenance,
            'n': self.n
        }

    def __repr__(self) -> str:
        return f"StabilityBudget({self.scheme}, W1={self.w1_bar:.6g}, W2={self.w2_bar:.6g}, {self.provenance})"


@dataclass(frozen=True)
class WeightPerturbation:
    """Norms of w - w' entering W1 and W2"""
    l1: float
    l2: float
    l0: int
    max_min: float
    max_prod: float

    def to_dict(self) -> dict:
        return {
            'l1': self.l1,
            'l2': self.l2,
            'l0': self.l0,
            'max_min': self.max_min,
            'max_prod': self.max_prod
        }
