"""
DP-2ERM command line
Differentially private two-stage weighted ERM for individualized treatment rules:
simulation studies, CSV-data runs, single Stage-1 weight solves and noise calibration reports.
"""
import os
import sys
import logging
import argparse
from pathlib import Path
from typing import Dict, List, Optional

from dotenv import load_dotenv

# Load environment variables FIRST before importing modules that need them
load_dotenv()

from bench import run_plan, summarize, plot_data, csv_constants, RunResult
from models import (
    IpwConfig, MmdConfig, EbwConfig, UniformConfig, KernelSpec, PrivacyParams, ProblemConstants, StabilityBudget,
    default_config
)
from models.experiment import format_float
from privacy import calibrate
from stability import budget_for_config, budget_universal
from utils.config import RunSettings, load_settings
from utils.dataset_io import read_dataset_csv
from utils.result_store import ResultStore, read_results
from weights import pin_moment_scale, solve_weights

# Configure logging
logging.basicConfig(
    level=os.getenv('DP2ERM_LOG_LEVEL', 'INFO').upper(),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class UsageError(ValueError):
    """Invalid command line"""


class CliParser(argparse.ArgumentParser):
    """argparse reports usage problems through UsageError so they map to exit code 1"""

    def error(self, message):
        raise UsageError(message)


# ============================================================================
# Argument Parsing
# ============================================================================

def _add_plan_flags(parser: argparse.ArgumentParser):
    parser.add_argument('--plan', help='plan file of KEY=VALUE lines')
    parser.add_argument('--out', help='output directory (default $DP2ERM_OUT_DIR or ./results)')
    parser.add_argument('--seed', type=int, help='root seed; unset draws one and prints it')
    parser.add_argument('--workers', type=int, help='worker processes (default: available cores)')
    parser.add_argument('--reps', type=int, help='replicates')
    parser.add_argument('--eps', help='comma list of epsilons, inf for non-private')
    parser.add_argument('--delta', type=float, help='fixed delta (default 1/n)')
    parser.add_argument('--scheme', help='comma list of ipw, mmd, ebw, uniform')
    parser.add_argument('--mechanism', help='comma list of gamma, gaussian')
    parser.add_argument('--baseline', action='store_true', default=None, help='also run the composition baseline')
    parser.add_argument('--no-tune', action='store_true', default=None, help='skip bootstrap tuning')
    parser.add_argument('--bootstrap', type=int, help='bootstrap resamples per grid point')
    parser.add_argument('--lambda1', type=float, help='L1 radius when tuning is off')
    parser.add_argument('--mmd-bandwidth', type=float, help='fixed RBF bandwidth for MMD weights')
    parser.add_argument('--record-timing', action='store_true', default=None, help='fill the wall_time_ms column')


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog='app.py', description='Differentially private two-stage ERM experiments')
    verbs = parser.add_subparsers(dest='verb', parser_class=CliParser)
    verbs.required = True

    simulate = verbs.add_parser('simulate', help='run a simulation plan')
    _add_plan_flags(simulate)
    simulate.add_argument('--scenario', help='linear, tree or nonlinear')
    simulate.add_argument('--n', type=int, help='training size')
    simulate.add_argument('--n-test', type=int, help='test size')
    simulate.add_argument('--p', type=int, help='covariate dimension')
    simulate.add_argument('--tree-literal', help='true: 2*X1 < -0.5 in the tree contrast; false: X1 < -0.5')

    run = verbs.add_parser('run', help='run a plan on a dataset CSV')
    _add_plan_flags(run)
    run.add_argument('--csv', help='dataset CSV (x1..xp,a,y[,f_opt,pi])')
    run.add_argument('--train-fraction', type=float, help='training share of each split (default 0.10)')

    weights = verbs.add_parser('weights', help='solve Stage-1 weights for a dataset CSV')
    weights.add_argument('--csv', required=True, help='dataset CSV')
    weights.add_argument('--scheme', required=True, help='ipw, mmd, ebw or uniform')
    weights.add_argument('--out', help='output directory')
    weights.add_argument('--ipw-mode', default='estimated', help='randomized, known_beta or estimated')
    weights.add_argument('--p0', type=float)
    weights.add_argument('--p1', type=float)
    weights.add_argument('--lambda-ipw', type=float, default=0.0)
    weights.add_argument('--lambda-mmd', type=float, default=1.0)
    weights.add_argument('--alpha', type=float, default=0.5)
    weights.add_argument('--bandwidth', type=float, help='RBF bandwidth (default: median heuristic)')
    weights.add_argument('--lambda-ebw', type=float, default=0.0)
    weights.add_argument('--include-squares', action='store_true')
    weights.add_argument('--norm', default='l2', help='EBW dual ball: l2 or linf')
    weights.add_argument('--R', type=float, help='IPW/EBW radius or MMD cap')

    cal = verbs.add_parser('calibrate', help='print the noise calibration for a budget')
    cal.add_argument('--eps', type=float, required=True)
    cal.add_argument('--delta', type=float, default=0.0)
    cal.add_argument('--mechanism', default='gamma')
    cal.add_argument('--n', type=int, help='sample size (taken from --csv when given)')
    cal.add_argument('--p', type=int, default=10, help='dimension (taken from --csv when given)')
    cal.add_argument('--zeta', type=float, help='per-sample gradient bound')
    cal.add_argument('--lam-tr', type=float, help='per-sample Hessian trace bound')
    cal.add_argument('--M', type=float, help='covariate norm bound (ITR constants)')
    cal.add_argument('--M-out', type=float, help='outcome bound (ITR constants)')
    cal.add_argument('--lambda1', type=float, default=5.0)
    cal.add_argument('--universal', action='store_true', help='use the universal budget W1 = 3n')
    cal.add_argument('--w1', type=float, help='explicit W1_bar')
    cal.add_argument('--w2', type=float, help='explicit W2_bar')
    cal.add_argument('--scheme', help='derive the budget from this scheme on --csv')
    cal.add_argument('--csv', help='dataset CSV for a scheme budget')

    summ = verbs.add_parser('summarize', help='summarize a results CSV')
    summ.add_argument('--results', required=True, help='results.csv from simulate or run')
    summ.add_argument('--out', help='output directory (default: next to the results file)')
    return parser


def _plan_flags(args: argparse.Namespace) -> Dict[str, object]:
    """Command-line values under their plan-file keys"""
    flags = {
        'OUT_DIR': args.out,
        'SEED': args.seed,
        'WORKERS': args.workers,
        'REPLICATES': args.reps,
        'EPSILONS': args.eps,
        'DELTA': args.delta,
        'SCHEMES': args.scheme,
        'MECHANISMS': args.mechanism,
        'BASELINE': 'true' if args.baseline else None,
        'TUNE': 'false' if args.no_tune else None,
        'BOOTSTRAP': args.bootstrap,
        'LAMBDA1': args.lambda1,
        'MMD_BANDWIDTH': args.mmd_bandwidth,
        'RECORD_TIMING': 'true' if args.record_timing else None,
    }
    if args.verb == 'simulate':
        flags.update({
            'SCENARIO': args.scenario,
            'N': args.n,
            'N_TEST': args.n_test,
            'P': args.p,
            'TREE_LITERAL': args.tree_literal,
        })
    else:
        flags.update({'CSV': args.csv, 'TRAIN_FRACTION': args.train_fraction})
    return flags


# ============================================================================
# Commands
# ============================================================================

def write_run_outputs(settings: RunSettings, result: RunResult, verb: str) -> List[Path]:
    """results.csv, summary.csv, per-(scheme, mechanism) plot data, metadata.txt and summary.xlsx"""
    plan = settings.plan
    store = ResultStore(settings.out_dir)
    metadata = {'command': verb, **plan.to_dict(), **result.metadata}
    paths = [store.write_results(result.rows, metadata)]

    ok_rows = [row for row in result.rows if row.status == 'ok']
    if ok_rows:
        summary = summarize(ok_rows)
        paths.append(store.write_summary(summary, metadata))
        paths.extend(store.write_plot_data(plot_data(summary), metadata))
        workbook = store.write_workbook(summary, metadata)
        if workbook is not None:
            paths.append(workbook)

    tuning = {f"replicate_{record['replicate']}": {k: v for k, v in record.items() if k != 'replicate'}
              for record in result.tuning}
    paths.append(store.write_metadata({**metadata, 'tuning': tuning}))
    return paths


def cmd_plan(args: argparse.Namespace) -> int:
    """simulate / run"""
    settings = load_settings(args.plan, _plan_flags(args))
    if settings.seed_was_drawn:
        print(f"seed: {settings.plan.seed}")

    result = run_plan(settings.plan)
    if not any(row.status == 'ok' for row in result.rows):
        logger.error("Every cell failed; see the log above")
        write_run_outputs(settings, result, args.verb)
        return EXIT_RUNTIME

    paths = write_run_outputs(settings, result, args.verb)
    for path in paths:
        print(path)
    logger.info(f"✓ {args.verb} finished: {len(result.rows)} rows, {len(paths)} files")
    return EXIT_OK


def scheme_config_from_args(args: argparse.Namespace):
    scheme = args.scheme.strip().lower()
    if scheme == 'ipw':
        return IpwConfig(mode=args.ipw_mode, p0=args.p0, p1=args.p1, lambda_ipw=args.lambda_ipw,
                         R=args.R if args.R is not None else 1.0)
    if scheme == 'mmd':
        return MmdConfig(alpha=args.alpha, lambda_mmd=args.lambda_mmd, R=args.R,
                         kernel=KernelSpec(bandwidth=args.bandwidth))
    if scheme == 'ebw':
        return EbwConfig(lambda_ebw=args.lambda_ebw, include_squares=args.include_squares, norm=args.norm,
                         R=args.R if args.R is not None else 1.0)
    if scheme == 'uniform':
        return UniformConfig()
    raise ValueError(f"unknown scheme '{args.scheme}', expected one of ipw, mmd, ebw, uniform")


def cmd_weights(args: argparse.Namespace) -> int:
    dataset = read_dataset_csv(args.csv).dataset
    config = pin_moment_scale(scheme_config_from_args(args), dataset)
    weights = solve_weights(dataset, config)

    store = ResultStore(args.out)
    path = store.write_weights(weights, {'command': 'weights', 'csv': args.csv, 'config': config.to_dict()})
    print(path)
    for key, value in weights.diagnostics.items():
        print(f"{key}: {value}")
    logger.info(f"✓ Wrote {weights.n} {config.scheme} weights (max {weights.max:.4g})")
    return EXIT_OK


def _calibration_constants(args: argparse.Namespace) -> ProblemConstants:
    if args.zeta is not None:
        M = args.M if args.M is not None else 1.0
        lam_tr = args.lam_tr if args.lam_tr is not None else 2.0 * M * M
        return ProblemConstants(M=M, M_out=args.M_out, lambda1=args.lambda1, zeta=args.zeta, lam_tr=lam_tr)
    if args.M is not None and args.M_out is not None:
        return ProblemConstants.for_itr(args.M, args.M_out, args.lambda1)
    raise ValueError("calibrate needs --zeta, or --M and --M-out for the ITR loss constants")


def cmd_calibrate(args: argparse.Namespace) -> int:
    privacy = PrivacyParams(epsilon=args.eps, delta=args.delta, mechanism=args.mechanism)
    dataset = read_dataset_csv(args.csv).dataset if args.csv else None
    n = dataset.n if dataset is not None else args.n
    p = dataset.p if dataset is not None else args.p
    if n is None:
        raise ValueError("calibrate needs --n or --csv")

    if dataset is not None and args.zeta is None and args.M is None:
        constants = csv_constants(dataset, args.lambda1)
    else:
        constants = _calibration_constants(args)

    if args.universal:
        budget = budget_universal(n)
    elif args.w1 is not None or args.w2 is not None:
        if args.w1 is None or args.w2 is None:
            raise ValueError("an explicit budget needs both --w1 and --w2")
        budget = StabilityBudget(w1_bar=args.w1, w2_bar=args.w2, scheme='explicit', provenance='explicit', n=n)
    elif args.scheme:
        if dataset is None:
            raise ValueError("a scheme budget needs --csv")
        config = pin_moment_scale(default_config(args.scheme.strip().lower()), dataset, constants.M)
        weights = solve_weights(dataset, config)
        budget = budget_for_config(config, dataset, constants, weights=weights)
    else:
        raise ValueError("calibrate needs one of --universal, --w1/--w2 or --scheme with --csv")

    calibration = calibrate(privacy, constants, budget, n, p)
    report = {
        'mechanism': calibration.mechanism,
        'epsilon': format_float(privacy.epsilon),
        'delta': format_float(privacy.delta),
        'zeta': format_float(constants.zeta),
        'lam_tr': format_float(constants.lam_tr),
        'n': n,
        'p': p,
        'noise_scale': format_float(calibration.noise_scale),
        'gamma_ridge': format_float(calibration.gamma_ridge),
        'w1_bar': format_float(budget.w1_bar),
        'w2_bar': format_float(budget.w2_bar),
        'provenance': budget.provenance,
    }
    for key, value in report.items():
        print(f"{key}: {value}")
    return EXIT_OK


def cmd_summarize(args: argparse.Namespace) -> int:
    frame = read_results(args.results)
    summary = summarize(frame)
    out_dir = args.out or str(Path(args.results).parent)
    store = ResultStore(out_dir)
    metadata = {'command': 'summarize', 'results': args.results, 'rows': len(frame)}
    paths = [store.write_summary(summary, metadata)]
    paths.extend(store.write_plot_data(plot_data(summary), metadata))
    workbook = store.write_workbook(summary, metadata)
    if workbook is not None:
        paths.append(workbook)
    for path in paths:
        print(path)
    return EXIT_OK


COMMANDS = {
    'simulate': cmd_plan,
    'run': cmd_plan,
    'weights': cmd_weights,
    'calibrate': cmd_calibrate,
    'summarize': cmd_summarize,
}


# ============================================================================
# Entry Point
# ============================================================================

def main(argv: Optional[List[str]] = None) -> int:
    """Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure"""
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return COMMANDS[args.verb](args)
    except (ValueError, FileNotFoundError, KeyError) as e:
        logger.error(f"{args.verb}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        logger.error(f"{args.verb} failed: {e}", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == '__main__':
    sys.exit(main())
