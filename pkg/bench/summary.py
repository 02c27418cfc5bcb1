"""Aggregation of result rows into per-cell means and standard deviations"""
import logging
from typing import Dict, Iterable, Tuple, Union

import numpy as np
import pandas as pd

from models.experiment import CSV_COLUMNS, ResultRow

logger = logging.getLogger(__name__)

GROUP_KEYS = ['scheme', 'mechanism', 'epsilon']
SUMMARY_COLUMNS = GROUP_KEYS + ['replicates', 'mean_acc', 'sd_acc', 'mean_value', 'sd_value']


def rows_to_frame(rows: Union[pd.DataFrame, Iterable[ResultRow]]) -> pd.DataFrame:
    if isinstance(rows, pd.DataFrame):
        return rows
    return pd.DataFrame([row.to_dict() for row in rows], columns=list(CSV_COLUMNS))


def summarize(rows: Union[pd.DataFrame, Iterable[ResultRow]]) -> pd.DataFrame:
    """Mean and SD (ddof=1) of accuracy and value per (scheme, mechanism, epsilon).

    Failed cells are left out; a group with one replicate reports SD 0.
    """
    frame = rows_to_frame(rows)
    if frame.empty:
        raise ValueError("cannot summarize an empty result table")
    if 'status' in frame.columns:
        dropped = int((frame['status'] != 'ok').sum())
        if dropped:
            logger.warning(f"Summary skips {dropped} failed cell(s)")
        frame = frame[frame['status'] == 'ok']
    frame = frame.astype({'epsilon': float, 'accuracy': float, 'value': float})

    grouped = frame.groupby(GROUP_KEYS, sort=False)
    summary = grouped.agg(
        replicates=('replicate', 'count'),
        mean_acc=('accuracy', 'mean'),
        sd_acc=('accuracy', 'std'),
        mean_value=('value', 'mean'),
        sd_value=('value', 'std'),
    ).reset_index()

    # single replicates and constant columns report exactly 0
    for source, mean_col, sd_col in (('accuracy', 'mean_acc', 'sd_acc'), ('value', 'mean_value', 'sd_value')):
        constant = (grouped[source].nunique() <= 1).to_numpy()
        summary.loc[constant & summary[mean_col].notna().to_numpy(), sd_col] = 0.0
    return summary.sort_values(GROUP_KEYS, kind='stable').reset_index(drop=True)[SUMMARY_COLUMNS]


def plot_data(summary: pd.DataFrame) -> Dict[Tuple[str, str], pd.DataFrame]:
    """One `epsilon mean_acc sd_acc` table per (scheme, mechanism), ordered by epsilon"""
    tables = {}
    for (scheme, mechanism), group in summary.groupby(['scheme', 'mechanism'], sort=True):
        table = group[['epsilon', 'mean_acc', 'sd_acc']].sort_values('epsilon').reset_index(drop=True)
        tables[(scheme, mechanism)] = table
    return tables


def cell_means(summary: pd.DataFrame, column: str = 'mean_acc') -> Dict[Tuple[str, str, float], float]:
    """Lookup (scheme, mechanism, epsilon) -> column value"""
    return {
        (row.scheme, row.mechanism, float(row.epsilon)): float(getattr(row, column))
        for row in summary.itertuples(index=False)
    }


def accuracy_samples(rows: Union[pd.DataFrame, Iterable[ResultRow]], scheme: str, mechanism: str,
                     epsilon: float) -> np.ndarray:
    """Accuracies of one cell across replicates"""
    frame = rows_to_frame(rows)
    mask = (frame['scheme'] == scheme) & (frame['mechanism'] == mechanism) & (frame['epsilon'].astype(float) == epsilon)
    if 'status' in frame.columns:
        mask &= frame['status'] == 'ok'
    return frame.loc[mask, 'accuracy'].astype(float).to_numpy()
