"""
Plan-file and environment configuration.

A plan file holds KEY=VALUE lines (dotenv syntax). Recognised keys:

    SCENARIO        linear | tree | nonlinear        (exclusive with CSV)
    CSV             path of a dataset CSV            (exclusive with SCENARIO)
    SCHEMES         comma list of ipw, mmd, ebw, uniform
    MECHANISMS      comma list of gamma, gaussian
    EPSILONS        comma list of positive numbers or inf
    DELTA           fixed delta in (0,1); unset means 1/n
    REPLICATES      replicate count
    SEED            root seed; unset draws one from system entropy
    N, N_TEST, P    scenario sizes
    TREE_LITERAL    true: tree contrast uses 2*X1 < -0.5; false: X1 < -0.5
    TRAIN_FRACTION  CSV-mode training share
    BASELINE        also run the composition baseline
    TUNE            bootstrap-tune regularization and lambda1
    BOOTSTRAP       bootstrap resamples per grid point
    GRID_LAMBDA_EBW, GRID_LAMBDA_IPW, GRID_LAMBDA_MMD, GRID_LAMBDA1   comma lists
    LAMBDA1         L1 radius when tuning is off
    MMD_BANDWIDTH   fixed RBF bandwidth; unset uses the median heuristic
    OUT_DIR         output directory
    WORKERS         worker processes
    RECORD_TIMING   fill the wall_time_ms column

Environment variables DP2ERM_SEED, DP2ERM_OUT_DIR, DP2ERM_WORKERS and
DP2ERM_RECORD_TIMING override the file; command-line flags override both.
"""
import logging
import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

from dotenv import dotenv_values

from models.experiment import DEFAULT_GRIDS, ExperimentPlan, ScenarioSpec
from .rng import resolve_seed

logger = logging.getLogger(__name__)

PLAN_KEYS = (
    'SCENARIO', 'CSV', 'SCHEMES', 'MECHANISMS', 'EPSILONS', 'DELTA', 'REPLICATES', 'SEED', 'N', 'N_TEST', 'P',
    'TREE_LITERAL', 'TRAIN_FRACTION', 'BASELINE', 'TUNE', 'BOOTSTRAP', 'LAMBDA1', 'MMD_BANDWIDTH', 'OUT_DIR',
    'WORKERS', 'RECORD_TIMING'
) + tuple(f"GRID_{key.upper()}" for key in DEFAULT_GRIDS)

ENV_KEYS = {
    'DP2ERM_SEED': 'SEED',
    'DP2ERM_OUT_DIR': 'OUT_DIR',
    'DP2ERM_WORKERS': 'WORKERS',
    'DP2ERM_RECORD_TIMING': 'RECORD_TIMING',
}

TRUE_VALUES = ('1', 'true', 'yes', 'on')
FALSE_VALUES = ('0', 'false', 'no', 'off')


@dataclass(frozen=True)
class RunSettings:
    """A resolved plan plus where its outputs go"""
    plan: ExperimentPlan
    out_dir: Path
    seed_was_drawn: bool = False


def parse_bool(key: str, value: str) -> bool:
    text = str(value).strip().lower()
    if text in TRUE_VALUES:
        return True
    if text in FALSE_VALUES:
        return False
    raise ValueError(f"{key}: expected true/false, got '{value}'")


def parse_float(key: str, value: str) -> float:
    try:
        number = float(str(value).strip())
    except ValueError:
        raise ValueError(f"{key}: expected a number, got '{value}'") from None
    if math.isnan(number):
        raise ValueError(f"{key}: NaN is not allowed")
    return number


def parse_int(key: str, value: str) -> int:
    try:
        return int(str(value).strip())
    except ValueError:
        raise ValueError(f"{key}: expected an integer, got '{value}'") from None


def parse_float_list(key: str, value: str) -> Tuple[float, ...]:
    items = [item.strip() for item in str(value).split(',') if item.strip()]
    if not items:
        raise ValueError(f"{key}: expected a comma-separated list, got '{value}'")
    return tuple(parse_float(key, item) for item in items)


def parse_name_list(key: str, value: str) -> Tuple[str, ...]:
    items = tuple(item.strip().lower() for item in str(value).split(',') if item.strip())
    if not items:
        raise ValueError(f"{key}: expected a comma-separated list, got '{value}'")
    return items


def read_plan_file(path: Union[str, Path]) -> Dict[str, str]:
    """KEY=VALUE pairs of a plan file; unknown keys are rejected"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"plan file not found: {path}")
    values = {k.strip().upper(): v for k, v in dotenv_values(path).items() if v is not None}
    unknown = sorted(set(values) - set(PLAN_KEYS))
    if unknown:
        raise ValueError(f"{path}: unknown plan key(s) {', '.join(unknown)}; valid keys: {', '.join(PLAN_KEYS)}")
    logger.info(f"Loaded {len(values)} key(s) from plan file {path}")
    return values


def environment_values(environ: Optional[Dict[str, str]] = None) -> Dict[str, str]:
    environ = os.environ if environ is None else environ
    return {key: environ[var] for var, key in ENV_KEYS.items() if environ.get(var) not in (None, '')}


def merge_layers(plan_file: Optional[Union[str, Path]] = None, flags: Optional[Dict[str, object]] = None,
                 environ: Optional[Dict[str, str]] = None) -> Dict[str, str]:
    """flags > environment > plan file; None-valued flags are ignored"""
    merged: Dict[str, str] = {}
    if plan_file:
        merged.update(read_plan_file(plan_file))
    merged.update(environment_values(environ))
    for key, value in (flags or {}).items():
        if value is not None:
            merged[key] = str(value)
    return merged


def plan_from_values(values: Dict[str, str]) -> RunSettings:
    """Build an ExperimentPlan from merged string values"""
    source_keys = [k for k in ('SCENARIO', 'CSV') if values.get(k)]
    if len(source_keys) != 1:
        raise ValueError("exactly one of SCENARIO or CSV must be set")

    scenario = None
    csv_path = None
    if 'SCENARIO' in source_keys:
        spec_args = {'id': values['SCENARIO'].strip().lower()}
        for key, field_name in (('N', 'n'), ('N_TEST', 'n_test'), ('P', 'p')):
            if values.get(key):
                spec_args[field_name] = parse_int(key, values[key])
        if values.get('TREE_LITERAL'):
            spec_args['tree_literal'] = parse_bool('TREE_LITERAL', values['TREE_LITERAL'])
        scenario = ScenarioSpec(**spec_args)
    else:
        csv_path = values['CSV'].strip()

    seed_given = values.get('SEED')
    seed = resolve_seed(parse_int('SEED', seed_given) if seed_given else None)
    seed_was_drawn = not seed_given

    args = {'scenario': scenario, 'csv_path': csv_path, 'seed': seed}
    if values.get('SCHEMES'):
        args['schemes'] = parse_name_list('SCHEMES', values['SCHEMES'])
    if values.get('MECHANISMS'):
        args['mechanisms'] = parse_name_list('MECHANISMS', values['MECHANISMS'])
    if values.get('EPSILONS'):
        args['epsilons'] = parse_float_list('EPSILONS', values['EPSILONS'])
    if values.get('DELTA'):
        args['delta'] = parse_float('DELTA', values['DELTA'])
    if values.get('REPLICATES'):
        args['replicates'] = parse_int('REPLICATES', values['REPLICATES'])
    if values.get('TRAIN_FRACTION'):
        args['train_fraction'] = parse_float('TRAIN_FRACTION', values['TRAIN_FRACTION'])
    for key, field_name in (('BASELINE', 'baseline'), ('TUNE', 'tune'), ('RECORD_TIMING', 'record_timing')):
        if values.get(key):
            args[field_name] = parse_bool(key, values[key])
    if values.get('BOOTSTRAP'):
        args['bootstrap'] = parse_int('BOOTSTRAP', values['BOOTSTRAP'])
    if values.get('LAMBDA1'):
        args['lambda1'] = parse_float('LAMBDA1', values['LAMBDA1'])
    if values.get('MMD_BANDWIDTH'):
        args['mmd_bandwidth'] = parse_float('MMD_BANDWIDTH', values['MMD_BANDWIDTH'])
    args['workers'] = parse_int('WORKERS', values['WORKERS']) if values.get('WORKERS') else (os.cpu_count() or 1)
    if args['workers'] < 1:
        raise ValueError(f"WORKERS must be >= 1, got {args['workers']}")

    grids = dict(DEFAULT_GRIDS)
    for grid_key in DEFAULT_GRIDS:
        key = f"GRID_{grid_key.upper()}"
        if values.get(key):
            grids[grid_key] = parse_float_list(key, values[key])
    args['grids'] = grids

    plan = ExperimentPlan(**args)
    out_dir = Path(values.get('OUT_DIR') or './results')
    return RunSettings(plan=plan, out_dir=out_dir, seed_was_drawn=seed_was_drawn)


def load_settings(plan_file: Optional[Union[str, Path]] = None, flags: Optional[Dict[str, object]] = None,
                  environ: Optional[Dict[str, str]] = None) -> RunSettings:
    return plan_from_values(merge_layers(plan_file, flags, environ))
