"""
Result storage helper for experiment outputs
"""
import logging
import math
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd
from openpyxl import Workbook

from models.experiment import CSV_COLUMNS, ResultRow, format_float
from models.weight_vector import WeightVector

logger = logging.getLogger(__name__)

VERSION = '0.1.0'
RESULTS_FILE = 'results.csv'
SUMMARY_FILE = 'summary.csv'
WORKBOOK_FILE = 'summary.xlsx'
METADATA_FILE = 'metadata.txt'
WEIGHTS_FILE = 'weights.csv'


def _text(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return format_float(float(value))
    if isinstance(value, np.ndarray):
        return ','.join(_text(v) for v in value.ravel())
    if isinstance(value, (list, tuple)):
        return ','.join(_text(v) for v in value)
    return str(value)


def flatten_metadata(metadata: Dict[str, Any], prefix: str = '') -> List[tuple]:
    """Nested dicts become dotted keys; order follows insertion"""
    items = []
    for key, value in metadata.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(flatten_metadata(value, prefix=f"{name}."))
        else:
            items.append((name, _text(value)))
    return items


def metadata_header(metadata: Dict[str, Any]) -> str:
    """`# key: value` block opening every written file"""
    lines = [f"# version: {VERSION}"]
    lines.extend(f"# {key}: {value}" for key, value in flatten_metadata(metadata))
    return '\n'.join(lines) + '\n'


def _cell(value):
    """Excel has no inf/NaN; write them as text"""
    if isinstance(value, (float, np.floating)) and not math.isfinite(value):
        return format_float(float(value)) if not math.isnan(value) else ''
    if isinstance(value, np.generic):
        return value.item()
    return value


class ResultStore:
    """Writes results, summaries, plot data and weights under one output directory"""

    def __init__(self, out_dir: Optional[Union[str, Path]] = None):
        """Explicit directory, else DP2ERM_OUT_DIR, else ./results"""
        self.out_dir = Path(out_dir or os.getenv('DP2ERM_OUT_DIR', './results'))
        self.out_dir.mkdir(parents=True, exist_ok=True)
        logger.info(f"Writing outputs to {self.out_dir}")

    def path(self, filename: str) -> Path:
        return self.out_dir / filename

    def _write_frame(self, frame: pd.DataFrame, filename: str, metadata: Dict[str, Any], **to_csv) -> Path:
        path = self.path(filename)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(metadata_header(metadata))
            frame.to_csv(f, index=False, lineterminator='\n', **to_csv)
        logger.info(f"Wrote {path}")
        return path

    def write_results(self, rows: Iterable[ResultRow], metadata: Dict[str, Any]) -> Path:
        """Results CSV; epsilon = inf is written as 'inf' and missing values as empty fields"""
        table = pd.DataFrame([row.to_csv_fields() for row in rows], columns=list(CSV_COLUMNS))
        return self._write_frame(table, RESULTS_FILE, metadata)

    def write_summary(self, summary: pd.DataFrame, metadata: Dict[str, Any]) -> Path:
        table = summary.copy()
        for column in table.columns:
            if pd.api.types.is_float_dtype(table[column]):
                table[column] = [format_float(v) if not pd.isna(v) else '' for v in table[column]]
        return self._write_frame(table, SUMMARY_FILE, metadata)

    def write_plot_data(self, tables: Dict[tuple, pd.DataFrame], metadata: Dict[str, Any]) -> List[Path]:
        """One whitespace-delimited `epsilon mean_acc sd_acc` file per (scheme, mechanism)"""
        paths = []
        for (scheme, mechanism), table in tables.items():
            path = self.path(f"{scheme}_{mechanism}.dat")
            with open(path, 'w', encoding='utf-8', newline='') as f:
                f.write(metadata_header({**metadata, 'scheme': scheme, 'mechanism': mechanism}))
                f.write('epsilon mean_acc sd_acc\n')
                for row in table.itertuples(index=False):
                    f.write(' '.join(_plot_field(v) for v in (row.epsilon, row.mean_acc, row.sd_acc)) + '\n')
            paths.append(path)
        logger.info(f"Wrote {len(paths)} plot-data file(s)")
        return paths

    def write_metadata(self, metadata: Dict[str, Any]) -> Path:
        path = self.path(METADATA_FILE)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            f.write(metadata_header(metadata))
        logger.info(f"Wrote {path}")
        return path

    def write_workbook(self, summary: pd.DataFrame, metadata: Dict[str, Any]) -> Optional[Path]:
        """summary.xlsx with a summary sheet and a metadata sheet; failures are logged, not raised"""
        path = self.path(WORKBOOK_FILE)
        try:
            wb = Workbook()
            ws = wb.active
            ws.title = 'summary'
            ws.append(list(summary.columns))
            for row in summary.itertuples(index=False):
                ws.append([_cell(v) for v in row])
            meta_ws = wb.create_sheet('metadata')
            meta_ws.append(['key', 'value'])
            meta_ws.append(['version', VERSION])
            for key, value in flatten_metadata(metadata):
                meta_ws.append([key, value])
            wb.save(path)
            logger.info(f"Wrote {path}")
            return path
        except Exception as e:
            logger.error(f"Failed to write Excel summary: {e}", exc_info=True)
            return None

    def write_weights(self, weights: WeightVector, metadata: Dict[str, Any]) -> Path:
        """Length-n weight column; solver diagnostics go into the header"""
        diagnostics = {k: v for k, v in weights.diagnostics.items()}
        table = pd.DataFrame({'weight': [format_float(float(w)) for w in weights.weights]})
        return self._write_frame(table, WEIGHTS_FILE, {**metadata, 'diagnostics': diagnostics})

    def exists(self, filename: str) -> bool:
        return self.path(filename).exists()


def _plot_field(value) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return 'nan'
    return format_float(float(value))


def read_results(path: Union[str, Path]) -> pd.DataFrame:
    """Results CSV back into a table (metadata comments skipped)"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"results file not found: {path}")
    frame = pd.read_csv(path, comment='#', keep_default_na=True)
    missing = [c for c in ('replicate', 'scheme', 'mechanism', 'epsilon', 'accuracy', 'value') if c not in frame.columns]
    if missing:
        raise ValueError(f"{path}: missing column(s) {', '.join(missing)}")
    if 'status' in frame.columns:
        frame['status'] = frame['status'].fillna('ok')
    return frame
