"""Scenario, experiment plan and result row models"""
import math
from dataclasses import dataclass, field, fields, replace
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from .configs import SCHEMES
from .dataset import Dataset
from .privacy import MECHANISMS

SCENARIOS = ('linear', 'tree', 'nonlinear')

DEFAULT_EPSILONS = (0.01, 0.1, 1.0, 10.0, math.inf)

# Tuning grids, overridable through GRID_* plan keys
DEFAULT_GRIDS = {
    'lambda_ebw': (0.0, 1e-3, 1e-2, 1e-1, 1.0),
    'lambda_ipw': (0.0, 1e-3, 1e-2, 1e-1, 1.0),
    'lambda_mmd': (1e-2, 1e-1, 1.0, 10.0),
    'lambda1': (1.0, 5.0, 10.0, 20.0),
}

CSV_COLUMNS = (
    'replicate', 'scheme', 'mechanism', 'epsilon', 'accuracy', 'value',
    'noise_scale', 'gamma_ridge', 'w1_bar', 'w2_bar', 'wall_time_ms', 'seed', 'status'
)


@dataclass(frozen=True)
class ScenarioSpec:
    """Simulation scenario; noise=False switches the outcome noise off"""
    id: str = 'linear'
    n: int = 400
    n_test: int = 10_000
    p: int = 10
    seed: Optional[int] = None
    tree_literal: bool = True
    noise: bool = True

    def __post_init__(self):
        if self.id not in SCENARIOS:
            raise ValueError(f"unknown scenario '{self.id}', expected one of {', '.join(SCENARIOS)}")
        if self.p < 5:
            raise ValueError(f"scenarios reference X1..X5; p must be >= 5, got {self.p}")
        if self.n < 2 or self.n_test < 1:
            raise ValueError(f"invalid sizes n={self.n}, n_test={self.n_test}")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass(frozen=True)
class EvalSet:
    """Held-out records with optional truth: f_opt contrasts and propensities of the observed arm"""
    dataset: Dataset
    f_opt: Optional[np.ndarray] = None
    pi: Optional[np.ndarray] = None
    mu: Optional[np.ndarray] = None

    @property
    def has_truth(self) -> bool:
        return self.f_opt is not None

    def subset(self, indices) -> 'EvalSet':
        idx = np.asarray(indices, dtype=int)
        return EvalSet(
            dataset=self.dataset.subset(idx),
            f_opt=None if self.f_opt is None else np.asarray(self.f_opt)[idx],
            pi=None if self.pi is None else np.asarray(self.pi)[idx],
            mu=None if self.mu is None else np.asarray(self.mu)[idx]
        )


@dataclass(frozen=True)
class ExperimentPlan:
    """One experiment: data source, cell grid, tuning and execution settings"""
    scenario: Optional[ScenarioSpec] = None
    csv_path: Optional[str] = None
    schemes: Tuple[str, ...] = ('ipw', 'mmd', 'ebw')
    mechanisms: Tuple[str, ...] = MECHANISMS
    epsilons: Tuple[float, ...] = DEFAULT_EPSILONS
    delta: Optional[float] = None
    replicates: int = 100
    seed: int = 0
    train_fraction: float = 0.10
    baseline: bool = False
    tune: bool = True
    bootstrap: int = 20
    grids: Dict[str, Tuple[float, ...]] = field(default_factory=lambda: dict(DEFAULT_GRIDS))
    lambda1: float = 5.0
    w_max_factor: float = 2.0
    workers: int = 1
    record_timing: bool = False
    mmd_bandwidth: Optional[float] = None

    def __post_init__(self):
        if (self.scenario is None) == (self.csv_path is None):
            raise ValueError("a plan needs exactly one data source: scenario or CSV")
        if not self.epsilons:
            raise ValueError("epsilons must be nonempty")
        for eps in self.epsilons:
            if math.isnan(eps) or not eps > 0:
                raise ValueError(f"epsilons must be > 0 or inf, got {eps}")
        for scheme in self.schemes:
            if scheme not in SCHEMES:
                raise ValueError(f"unknown scheme '{scheme}', expected one of {SCHEMES}")
        for mechanism in self.mechanisms:
            if mechanism not in MECHANISMS:
                raise ValueError(f"unknown mechanism '{mechanism}', expected one of {MECHANISMS}")
        if not self.schemes or not self.mechanisms:
            raise ValueError("schemes and mechanisms must be nonempty")
        if self.delta is not None and not 0 < self.delta < 1:
            raise ValueError(f"delta must lie in (0,1), got {self.delta}")
        if self.replicates < 1 or self.bootstrap < 1:
            raise ValueError(f"replicates and bootstrap must be >= 1, got {self.replicates}, {self.bootstrap}")
        if not 0 < self.train_fraction < 1:
            raise ValueError(f"train fraction must lie in (0,1), got {self.train_fraction}")
        for key, grid in self.grids.items():
            if len(grid) == 0:
                raise ValueError(f"tuning grid '{key}' is empty")
        if self.mmd_bandwidth is not None and not self.mmd_bandwidth > 0:
            raise ValueError(f"MMD bandwidth must be > 0, got {self.mmd_bandwidth}")

    def delta_for(self, n: int) -> float:
        """Fixed delta, or the default 1/n rule"""
        return self.delta if self.delta is not None else 1.0 / n

    def grid(self, key: str) -> Tuple[float, ...]:
        return tuple(self.grids.get(key, DEFAULT_GRIDS[key]))

    def with_overrides(self, **overrides) -> 'ExperimentPlan':
        return replace(self, **overrides)

    def to_dict(self) -> dict:
        return {
            'source': f"csv:{self.csv_path}" if self.csv_path else f"scenario:{self.scenario.id}",
            'scenario': None if self.scenario is None else self.scenario.to_dict(),
            'schemes': ','.join(self.schemes),
            'mechanisms': ','.join(self.mechanisms),
            'epsilons': ','.join(format_float(e) for e in self.epsilons),
            'delta': '1/n' if self.delta is None else self.delta,
            'replicates': self.replicates,
            'seed': self.seed,
            'train_fraction': self.train_fraction,
            'baseline': self.baseline,
            'tune': self.tune,
            'bootstrap': self.bootstrap,
            'grids': {k: ','.join(format_float(v) for v in self.grid(k)) for k in DEFAULT_GRIDS},
            'lambda1': self.lambda1,
            'w_max_factor': self.w_max_factor,
            'mmd_bandwidth': 'median' if self.mmd_bandwidth is None else self.mmd_bandwidth
        }


def format_float(value: Optional[float]) -> str:
    """Shortest round-trip text; inf as 'inf', None as empty"""
    if value is None:
        return ''
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return repr(float(value))


@dataclass(frozen=True)
class ResultRow:
    """One (replicate, scheme, mechanism, epsilon) cell"""
    replicate: int
    scheme: str
    mechanism: str
    epsilon: float
    accuracy: Optional[float]
    value: Optional[float]
    noise_scale: Optional[float]
    gamma_ridge: Optional[float]
    w1_bar: Optional[float]
    w2_bar: Optional[float]
    seed: int
    status: str = 'ok'
    wall_time_ms: Optional[float] = None

    @property
    def key(self) -> tuple:
        return (self.replicate, self.scheme, self.mechanism, self.epsilon)

    def to_dict(self) -> dict:
        return {name: getattr(self, name) for name in CSV_COLUMNS}

    def to_csv_fields(self) -> Sequence[str]:
        out = []
        for name in CSV_COLUMNS:
            value = getattr(self, name)
            if isinstance(value, float) or (value is None and name not in ('scheme', 'mechanism', 'status')):
                out.append(format_float(value))
            else:
                out.append(str(value))
        return out
