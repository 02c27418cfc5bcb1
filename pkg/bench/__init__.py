"""Experiment harness: replicate loops, tuning and summaries"""
from .harness import (
    RunResult, DataSource, run_plan, run_replicate, composition_baseline, split_train_test, prepare_source,
    csv_constants, expected_row_count, COMPOSITION_SUFFIX
)
from .tuning import TuningResult, bootstrap_tune, scheme_grid, weighted_rule_fitter, draw_resample
from .summary import summarize, plot_data, cell_means, accuracy_samples, rows_to_frame

__all__ = [
    'RunResult', 'DataSource', 'run_plan', 'run_replicate', 'composition_baseline', 'split_train_test',
    'prepare_source', 'csv_constants', 'expected_row_count', 'COMPOSITION_SUFFIX',
    'TuningResult', 'bootstrap_tune', 'scheme_grid', 'weighted_rule_fitter', 'draw_resample',
    'summarize', 'plot_data', 'cell_means', 'accuracy_samples', 'rows_to_frame'
]
