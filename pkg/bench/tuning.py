"""Bootstrap out-of-bag tuning of the weighting and L1 parameters"""
import itertools
import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from erm import solve_nonprivate
from itr import empirical_value, estimate_propensity
from models.constants import ProblemConstants
from models.dataset import Dataset
from models.experiment import EvalSet
from models.rule import DecisionRule
from models.solution import ErmSpec
from weights import pin_moment_scale, solve_weights

logger = logging.getLogger(__name__)

MAX_RESAMPLE_ATTEMPTS = 100
TIE_TOL = 1e-12

GridPoint = Dict[str, float]
FitFn = Callable[[Dataset, GridPoint], DecisionRule]


@dataclass(frozen=True)
class TuningResult:
    """Chosen grid point and the mean out-of-bag value of every point"""
    chosen: GridPoint
    scores: List[Tuple[GridPoint, float]] = field(default_factory=list)
    resamples: int = 0

    def to_dict(self) -> dict:
        return {
            'chosen': dict(self.chosen),
            'scores': [{**point, 'oob_value': score} for point, score in self.scores],
            'resamples': self.resamples
        }


def scheme_grid(config, reg_values: Sequence[float], lambda1_values: Sequence[float]) -> List[GridPoint]:
    """Cartesian grid over the scheme's regularization parameter and lambda1"""
    if config.REG_PARAM is None:
        return [{'lambda1': float(l1)} for l1 in lambda1_values]
    return [
        {config.REG_PARAM: float(reg), 'lambda1': float(l1)}
        for reg, l1 in itertools.product(reg_values, lambda1_values)
    ]


def weighted_rule_fitter(config, constants: ProblemConstants) -> FitFn:
    """Fit Stage-1 weights and the non-private weighted ERM at a grid point"""
    def fit(dataset: Dataset, point: GridPoint) -> DecisionRule:
        overrides = {k: v for k, v in point.items() if k != 'lambda1'}
        scheme_config = config.with_overrides(**overrides) if overrides else config
        scheme_config = pin_moment_scale(scheme_config, dataset, constants.M)
        weights = solve_weights(dataset, scheme_config)
        spec = ErmSpec(constants=constants.with_lambda1(point['lambda1']))
        return DecisionRule(solve_nonprivate(dataset, weights, spec).theta)
    return fit


def draw_resample(n: int, groups: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Bootstrap indices with both arms present, plus the nonempty out-of-bag complement"""
    for _ in range(MAX_RESAMPLE_ATTEMPTS):
        idx = rng.integers(0, n, size=n)
        drawn = groups[idx]
        oob = np.setdiff1d(np.arange(n), idx)
        if drawn.min() != drawn.max() and oob.size > 0:
            return idx, oob
    raise RuntimeError(f"no bootstrap resample with both arms after {MAX_RESAMPLE_ATTEMPTS} attempts")


def _tie_key(point: GridPoint) -> tuple:
    # larger regularization first, then smaller L1 radius
    reg = sum(v for k, v in point.items() if k != 'lambda1')
    return (-reg, point.get('lambda1', 0.0))


def bootstrap_tune(train: Union[EvalSet, Dataset], grid: Sequence[GridPoint], B: int,
                   rng: np.random.Generator, fit: FitFn) -> TuningResult:
    """Grid point with the largest mean out-of-bag empirical value over B bootstrap resamples.

    Only the training split is seen here. Propensities come from the EvalSet when
    present and are estimated on the training split otherwise. Every grid point is
    scored on the same B resamples; a fit that fails on a resample is skipped.
    """
    if B < 1:
        raise ValueError(f"bootstrap count must be >= 1, got {B}")
    if len(grid) == 0:
        raise ValueError("tuning grid must be nonempty")
    if len(grid) == 1:
        return TuningResult(chosen=dict(grid[0]), scores=[(dict(grid[0]), float('nan'))], resamples=0)

    if isinstance(train, EvalSet):
        dataset = train.dataset
        pi = train.pi if train.pi is not None else estimate_propensity(dataset)
    else:
        dataset = train
        pi = estimate_propensity(dataset)
    pi = np.asarray(pi, dtype=float)

    resamples = [draw_resample(dataset.n, dataset.groups, rng) for _ in range(B)]

    scores = []
    for point in grid:
        values = []
        for idx, oob in resamples:
            try:
                rule = fit(dataset.subset(idx), point)
                values.append(empirical_value(rule, dataset.subset(oob), pi[oob]))
            except Exception as e:
                logger.warning(f"Tuning fit failed at {point}: {e}")
                continue
        score = float(np.mean(values)) if values else -np.inf
        scores.append((dict(point), score))

    best = max(score for _, score in scores)
    if not np.isfinite(best):
        raise RuntimeError(f"every tuning fit failed on all {B} resamples")
    tied = [point for point, score in scores if score >= best - TIE_TOL * max(1.0, abs(best))]
    chosen = min(tied, key=_tie_key)
    logger.info(f"Tuned {chosen} (mean OOB value {best:.4g}, {len(tied)} tied of {len(grid)})")
    return TuningResult(chosen=chosen, scores=scores, resamples=B)
