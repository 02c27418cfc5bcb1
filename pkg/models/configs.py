"""Stage-1 weighting scheme configuration models"""
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

IPW_MODES = ('randomized', 'known_beta', 'estimated')
SCHEMES = ('ipw', 'mmd', 'ebw', 'uniform')


@dataclass(frozen=True)
class IpwConfig:
    """Inverse probability weights: randomized trial, known or estimated logistic parameter"""
    mode: str = 'estimated'
    p0: Optional[float] = None
    p1: Optional[float] = None
    beta_star: Optional[Sequence[float]] = None
    R: float = 1.0
    lambda_ipw: float = 0.0
    tol: float = 1e-8
    max_iter: int = 100_000

    scheme = 'ipw'
    REG_PARAM = 'lambda_ipw'

    def __post_init__(self):
        if self.mode not in IPW_MODES:
            raise ValueError(f"unknown IPW mode '{self.mode}', expected one of {IPW_MODES}")
        if self.mode == 'randomized':
            for name, value in (('p0', self.p0), ('p1', self.p1)):
                if value is None or not 0 < value < 1:
                    raise ValueError(f"randomized IPW requires {name} in (0,1), got {value}")
        if self.mode == 'known_beta' and self.beta_star is None:
            raise ValueError("known_beta IPW requires beta_star")
        if self.mode in ('estimated', 'known_beta') and self.R <= 0:
            raise ValueError(f"IPW radius R must be positive, got {self.R}")
        if self.lambda_ipw < 0:
            raise ValueError(f"lambda_ipw must be >= 0, got {self.lambda_ipw}")

    @property
    def tag(self) -> str:
        return f"ipw_{self.mode}"

    def with_overrides(self, **overrides) -> 'IpwConfig':
        return replace(self, **overrides)

    @classmethod
    def from_dict(cls, data: dict) -> 'IpwConfig':
        known = {k: data[k] for k in ('mode', 'p0', 'p1', 'beta_star', 'R', 'lambda_ipw', 'tol', 'max_iter') if k in data}
        return cls(**known)

    def to_dict(self) -> dict:
        return {
            'scheme': self.scheme,
            'mode': self.mode,
            'p0': self.p0,
            'p1': self.p1,
            'beta_star': None if self.beta_star is None else list(np.asarray(self.beta_star, dtype=float)),
            'R': self.R,
            'lambda_ipw': self.lambda_ipw
        }


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family and bandwidth; bandwidth None means median pairwise distance"""
    family: str = 'gaussian_rbf'
    bandwidth: Optional[float] = None
    C: float = 1.0

    def __post_init__(self):
        if self.family != 'gaussian_rbf':
            raise ValueError(f"unsupported kernel family '{self.family}'")
        if self.bandwidth is not None and not self.bandwidth > 0:
            raise ValueError(f"kernel bandwidth must be > 0, got {self.bandwidth}")

    def to_dict(self) -> dict:
        return {'family': self.family, 'bandwidth': self.bandwidth, 'C': self.C}


@dataclass(frozen=True)
class MmdConfig:
    """Kernel MMD balancing weights"""
    alpha: float = 0.5
    lambda_mmd: float = 1.0
    R: Optional[float] = None
    kernel: KernelSpec = field(default_factory=KernelSpec)
    tol: float = 1e-8
    max_iter: int = 100_000

    scheme = 'mmd'
    tag = 'mmd'
    REG_PARAM = 'lambda_mmd'

    def __post_init__(self):
        if not 0 <= self.alpha <= 1:
            raise ValueError(f"alpha must lie in [0,1], got {self.alpha}")
        if not self.lambda_mmd > 0:
            raise ValueError(f"lambda_mmd must be > 0, got {self.lambda_mmd}")
        if self.R is not None and self.R <= 0:
            raise ValueError(f"MMD cap R must be positive, got {self.R}")

    def cap_for(self, n: int, n_min: int) -> float:
        """Sup-norm cap on the raw (per-arm sum n) weights"""
        return float(self.R) if self.R is not None else 10.0 * n / n_min

    def with_overrides(self, **overrides) -> 'MmdConfig':
        return replace(self, **overrides)

    @classmethod
    def from_dict(cls, data: dict) -> 'MmdConfig':
        kernel = data.get('kernel')
        kernel = kernel if isinstance(kernel, KernelSpec) else KernelSpec(**(kernel or {}))
        known = {k: data[k] for k in ('alpha', 'lambda_mmd', 'R', 'tol', 'max_iter') if k in data}
        return cls(kernel=kernel, **known)

    def to_dict(self) -> dict:
        return {
            'scheme': self.scheme,
            'alpha': self.alpha,
            'lambda_mmd': self.lambda_mmd,
            'R': self.R,
            'kernel': self.kernel.to_dict()
        }


@dataclass(frozen=True)
class EbwConfig:
    """Entropy balancing weights via the convex dual.

    `moments` maps an (n, p) covariate matrix to the (n, K) non-constant moment
    matrix; None means raw first moments (plus squares when include_squares).
    """
    moments: Optional[Callable[[np.ndarray], np.ndarray]] = None
    include_squares: bool = False
    base_q: Optional[Sequence[float]] = None
    R: float = 1.0
    lambda_ebw: float = 0.0
    norm: str = 'l2'
    moment_scale: Optional[float] = None
    tol: float = 1e-8
    max_iter: int = 100_000

    scheme = 'ebw'
    tag = 'ebw'
    REG_PARAM = 'lambda_ebw'

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError(f"EBW dual radius R must be positive, got {self.R}")
        if self.lambda_ebw < 0:
            raise ValueError(f"lambda_ebw must be >= 0, got {self.lambda_ebw}")
        if self.norm not in ('l2', 'linf'):
            raise ValueError(f"EBW norm must be 'l2' or 'linf', got {self.norm}")
        if self.base_q is not None:
            q = np.asarray(self.base_q, dtype=float)
            if np.any(q <= 0) or abs(q.sum() - 1.0) > 1e-10:
                raise ValueError("base_q must be strictly positive and sum to 1")
        if self.moment_scale is not None and not self.moment_scale > 0:
            raise ValueError(f"moment_scale must be > 0, got {self.moment_scale}")

    def moment_matrix(self, X: np.ndarray) -> np.ndarray:
        """Non-constant moments g_1..g_K of each row"""
        if self.moments is not None:
            G = np.asarray(self.moments(X), dtype=float)
            return G.reshape(X.shape[0], -1)
        if self.include_squares:
            return np.hstack([X, X ** 2])
        return np.asarray(X, dtype=float)

    def with_overrides(self, **overrides) -> 'EbwConfig':
        return replace(self, **overrides)

    @classmethod
    def from_dict(cls, data: dict) -> 'EbwConfig':
        known = {k: data[k] for k in ('include_squares', 'base_q', 'R', 'lambda_ebw', 'norm', 'moment_scale', 'tol', 'max_iter') if k in data}
        return cls(**known)

    def to_dict(self) -> dict:
        return {
            'scheme': self.scheme,
            'moments': 'custom' if self.moments is not None else ('first+squares' if self.include_squares else 'first'),
            'base_q': 'uniform' if self.base_q is None else 'custom',
            'R': self.R,
            'lambda_ebw': self.lambda_ebw,
            'norm': self.norm,
            'moment_scale': self.moment_scale
        }


@dataclass(frozen=True)
class UniformConfig:
    """Data-independent unit weights (plain DP-ERM)"""
    scheme = 'uniform'
    tag = 'uniform'
    REG_PARAM = None

    def with_overrides(self, **overrides) -> 'UniformConfig':
        if overrides:
            raise ValueError(f"uniform weights take no parameters, got {sorted(overrides)}")
        return self

    def to_dict(self) -> dict:
        return {'scheme': self.scheme}


def default_config(scheme: str):
    """Default configuration for a scheme id"""
    if scheme == 'ipw':
        return IpwConfig()
    if scheme == 'mmd':
        return MmdConfig()
    if scheme == 'ebw':
        return EbwConfig()
    if scheme == 'uniform':
        return UniformConfig()
    raise ValueError(f"unknown scheme '{scheme}', expected one of {SCHEMES}")
