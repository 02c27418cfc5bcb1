"""Replicate loops over (scheme x mechanism x epsilon) cells"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from erm import run_composition_baseline, solve_private
from itr import constant_rule_accuracy, estimate_propensity, evaluate
from models.budget import StabilityBudget
from models.configs import KernelSpec, MmdConfig, default_config
from models.constants import ProblemConstants
from models.dataset import Dataset
from models.experiment import CSV_COLUMNS, EvalSet, ExperimentPlan, ResultRow
from models.privacy import Calibration, PrivacyParams
from models.rule import DecisionRule
from models.solution import ErmSolution, ErmSpec
from privacy import calibrate
from simgen import generate, scenario_constants
from stability import budget_for_config, budget_universal
from utils.dataset_io import read_dataset_csv
from utils.rng import STAGE_BASELINE, STAGE_DATA, STAGE_NOISE, STAGE_TUNE, cell_key, cell_stream
from weights import pin_moment_scale, solve_weights
from .tuning import bootstrap_tune, scheme_grid, weighted_rule_fitter

logger = logging.getLogger(__name__)

COMPOSITION_SUFFIX = '-composition'
MAX_SPLIT_ATTEMPTS = 100


@dataclass
class RunResult:
    """Rows of a plan run plus the per-replicate tuning record and run metadata"""
    rows: List[ResultRow]
    tuning: List[Dict[str, Any]] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_dict() for row in self.rows], columns=list(CSV_COLUMNS))


@dataclass(frozen=True)
class DataSource:
    """Where a replicate's train/test split comes from"""
    plan: ExperimentPlan
    pool: Optional[EvalSet] = None
    constants: Optional[ProblemConstants] = None


# ==================== Data ====================

def csv_constants(dataset: Dataset, lambda1: float) -> ProblemConstants:
    """Covariate and outcome bounds read off the ingested data"""
    M = float(np.max(np.linalg.norm(dataset.covariates, axis=1)))
    M_out = float(np.max(np.abs(dataset.outcomes)))
    logger.warning(f"Bounds taken from the data: M={M:.4g}, M_out={M_out:.4g}")
    return ProblemConstants.for_itr(M=max(M, 1e-12), M_out=M_out, lambda1=lambda1)


def split_train_test(pool: EvalSet, train_fraction: float, rng: np.random.Generator) -> Tuple[EvalSet, EvalSet]:
    """Random split with round(train_fraction * n) training records holding both arms"""
    n = pool.dataset.n
    n_train = int(round(train_fraction * n))
    if n_train < 2 or n_train >= n:
        raise ValueError(f"train fraction {train_fraction} leaves {n_train} of {n} records for training")
    groups = pool.dataset.groups
    for _ in range(MAX_SPLIT_ATTEMPTS):
        order = rng.permutation(n)
        train_idx = np.sort(order[:n_train])
        if groups[train_idx].min() != groups[train_idx].max():
            return pool.subset(train_idx), pool.subset(np.sort(order[n_train:]))
    raise RuntimeError(f"no training split with both arms after {MAX_SPLIT_ATTEMPTS} attempts")


def prepare_source(plan: ExperimentPlan) -> Tuple[DataSource, Dict[str, Any]]:
    """Load the CSV pool (with propensities) or leave scenario draws to the replicates"""
    if plan.scenario is not None:
        constants = scenario_constants(plan.scenario, plan.lambda1)
        return DataSource(plan=plan, constants=constants), {'constants': constants.to_dict()}

    pool = read_dataset_csv(plan.csv_path)
    meta: Dict[str, Any] = {'n_records': pool.dataset.n, 'p': pool.dataset.p}
    if pool.pi is None:
        pool = EvalSet(dataset=pool.dataset, f_opt=pool.f_opt, pi=estimate_propensity(pool.dataset), mu=pool.mu)
        meta['propensity'] = 'estimated (logistic regression, full CSV)'
    else:
        meta['propensity'] = 'pi column'
    if pool.has_truth:
        meta['constant_rules'] = constant_rule_accuracy(pool.f_opt)
    constants = csv_constants(pool.dataset, plan.lambda1)
    meta['constants'] = constants.to_dict()
    return DataSource(plan=plan, pool=pool, constants=constants), meta


def replicate_data(source: DataSource, replicate: int) -> Tuple[EvalSet, EvalSet]:
    plan = source.plan
    rng = cell_stream(plan.seed, cell_key(replicate, STAGE_DATA))
    if source.pool is None:
        return generate(plan.scenario, rng)
    return split_train_test(source.pool, plan.train_fraction, rng)


# ==================== Cells ====================

def scheme_config(plan: ExperimentPlan, scheme: str):
    config = default_config(scheme)
    if isinstance(config, MmdConfig) and plan.mmd_bandwidth is not None:
        config = config.with_overrides(kernel=KernelSpec(bandwidth=plan.mmd_bandwidth))
    return config


def privacy_for(plan: ExperimentPlan, mechanism: str, epsilon: float, n: int) -> PrivacyParams:
    delta = plan.delta_for(n) if mechanism == 'gaussian' else 0.0
    return PrivacyParams(epsilon=epsilon, delta=delta, mechanism=mechanism)


def composition_baseline(dataset: Dataset, scheme: str, spec: ErmSpec, privacy: PrivacyParams,
                         rng: Optional[np.random.Generator] = None, config=None) -> ErmSolution:
    """DP-2ERM calibrated to the universal budget; at epsilon = inf it is the non-private fit"""
    config = default_config(scheme) if config is None else config
    solution, _, _ = run_composition_baseline(dataset, config, spec, privacy, rng)
    return solution


def _tune(plan: ExperimentPlan, train: EvalSet, config, constants: ProblemConstants,
          replicate: int, scheme_idx: int) -> Dict[str, float]:
    if not plan.tune:
        point = {'lambda1': plan.lambda1}
        if config.REG_PARAM is not None:
            point[config.REG_PARAM] = getattr(config, config.REG_PARAM)
        return point
    grid = scheme_grid(
        config,
        plan.grid(config.REG_PARAM) if config.REG_PARAM is not None else (),
        plan.grid('lambda1')
    )
    rng = cell_stream(plan.seed, cell_key(replicate, STAGE_TUNE, scheme_idx))
    result = bootstrap_tune(train, grid, plan.bootstrap, rng, weighted_rule_fitter(config, constants))
    return result.chosen


def _error_row(plan, replicate, label, mechanism, epsilon, error: Exception) -> ResultRow:
    return ResultRow(
        replicate=replicate, scheme=label, mechanism=mechanism, epsilon=epsilon,
        accuracy=None, value=None, noise_scale=None, gamma_ridge=None, w1_bar=None, w2_bar=None,
        seed=plan.seed, status=f"error: {error}"
    )


def _solve_cell(plan: ExperimentPlan, train: EvalSet, test: EvalSet, weights, spec: ErmSpec,
                calibration: Calibration, rng: np.random.Generator, replicate: int, label: str,
                mechanism: str, epsilon: float, budget: StabilityBudget) -> ResultRow:
    started = time.perf_counter()
    solution = solve_private(train.dataset, weights, spec, calibration, rng)
    report = evaluate(DecisionRule(solution.theta), test)
    elapsed = (time.perf_counter() - started) * 1000.0 if plan.record_timing else None
    return ResultRow(
        replicate=replicate,
        scheme=label,
        mechanism=mechanism,
        epsilon=epsilon,
        accuracy=report.accuracy,
        value=report.empirical_value,
        noise_scale=calibration.noise_scale,
        gamma_ridge=calibration.gamma_ridge,
        w1_bar=budget.w1_bar,
        w2_bar=budget.w2_bar,
        seed=plan.seed,
        wall_time_ms=elapsed
    )


def _labels(plan: ExperimentPlan, scheme: str) -> List[Tuple[str, int]]:
    """Row labels of a scheme with their noise stage id"""
    labels = [(scheme, STAGE_NOISE)]
    if plan.baseline and scheme != 'uniform':
        labels.append((scheme + COMPOSITION_SUFFIX, STAGE_BASELINE))
    return labels


def _cells(plan: ExperimentPlan):
    for m_idx, mechanism in enumerate(plan.mechanisms):
        for e_idx, epsilon in enumerate(plan.epsilons):
            yield m_idx, mechanism, e_idx, epsilon


def _error_rows(plan: ExperimentPlan, replicate: int, scheme: str, error: Exception) -> List[ResultRow]:
    return [
        _error_row(plan, replicate, label, mechanism, epsilon, error)
        for label, _ in _labels(plan, scheme)
        for _, mechanism, _, epsilon in _cells(plan)
    ]


def run_replicate(source: DataSource, replicate: int) -> Tuple[List[ResultRow], Dict[str, Any]]:
    """All cells of one replicate; failures become error rows"""
    plan = source.plan
    rows: List[ResultRow] = []
    tuning: Dict[str, Any] = {'replicate': replicate}

    try:
        train, test = replicate_data(source, replicate)
    except Exception as e:
        logger.error(f"Replicate {replicate}: data preparation failed: {e}", exc_info=True)
        for scheme in plan.schemes:
            rows.extend(_error_rows(plan, replicate, scheme, e))
        return rows, tuning

    n, p = train.dataset.n, train.dataset.p
    universal = budget_universal(n)
    for s_idx, scheme in enumerate(plan.schemes):
        try:
            config = scheme_config(plan, scheme)
            point = _tune(plan, train, config, source.constants, replicate, s_idx)
            overrides = {k: v for k, v in point.items() if k != 'lambda1'}
            config = config.with_overrides(**overrides) if overrides else config
            spec = ErmSpec(constants=source.constants.with_lambda1(point['lambda1']))
            config = pin_moment_scale(config, train.dataset, spec.constants.M)
            weights = solve_weights(train.dataset, config)
            budget = budget_for_config(config, train.dataset, spec.constants, weights=weights,
                                       w_max_factor=plan.w_max_factor)
            tuning[scheme] = {**point, 'budget': budget.provenance}
            if getattr(config, 'moment_scale', None) is not None:
                tuning[scheme]['moment_scale'] = config.moment_scale
        except Exception as e:
            logger.error(f"Replicate {replicate}, scheme {scheme}: stage 1 failed: {e}", exc_info=True)
            rows.extend(_error_rows(plan, replicate, scheme, e))
            continue

        for label, stage in _labels(plan, scheme):
            cell_budget = budget if stage == STAGE_NOISE else universal
            for m_idx, mechanism, e_idx, epsilon in _cells(plan):
                try:
                    privacy = privacy_for(plan, mechanism, epsilon, n)
                    calibration = calibrate(privacy, spec.constants, cell_budget, n, p)
                    rng = cell_stream(plan.seed, cell_key(replicate, stage, s_idx, m_idx, e_idx))
                    rows.append(_solve_cell(plan, train, test, weights, spec, calibration, rng, replicate,
                                            label, mechanism, epsilon, cell_budget))
                except Exception as e:
                    logger.error(f"Cell ({replicate}, {label}, {mechanism}, eps={epsilon}) failed: {e}", exc_info=True)
                    rows.append(_error_row(plan, replicate, label, mechanism, epsilon, e))
                    continue

    logger.debug(f"Replicate {replicate} done: {len(rows)} rows")
    return rows, tuning


def _run_replicate_task(args):
    return run_replicate(*args)


def run_plan(plan: ExperimentPlan) -> RunResult:
    """Run every (replicate, scheme, mechanism, epsilon) cell of a plan.

    Rows come back ordered by replicate, then scheme, mechanism and epsilon,
    independent of the worker count.
    """
    source, meta = prepare_source(plan)
    tasks = [(source, r) for r in range(plan.replicates)]
    logger.info(
        f"Running plan: {plan.replicates} replicates x {len(plan.schemes)} schemes x "
        f"{len(plan.mechanisms)} mechanisms x {len(plan.epsilons)} epsilons, workers={plan.workers}"
    )

    if plan.workers > 1 and plan.replicates > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as executor:
            outputs = list(executor.map(_run_replicate_task, tasks))
    else:
        outputs = [run_replicate(*task) for task in tasks]

    rows = [row for replicate_rows, _ in outputs for row in replicate_rows]
    tuning = [record for _, record in outputs]
    failed = sum(1 for row in rows if row.status != 'ok')
    if failed:
        logger.warning(f"{failed} of {len(rows)} cells failed")
    logger.info(f"✓ Plan finished: {len(rows)} rows")
    meta['tuning_reuse'] = 'tuned once per (replicate, scheme) without privacy noise, reused across epsilon'
    return RunResult(rows=rows, tuning=tuning, metadata=meta)


def expected_row_count(plan: ExperimentPlan) -> int:
    per_scheme = len(plan.mechanisms) * len(plan.epsilons)
    baselines = sum(1 for s in plan.schemes if s != 'uniform') if plan.baseline else 0
    return plan.replicates * per_scheme * (len(plan.schemes) + baselines)
