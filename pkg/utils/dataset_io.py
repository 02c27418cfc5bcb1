"""
Dataset CSV ingest and export.

Format: header `x1,...,xp,a,y` with optional truth columns `f_opt` and `pi`;
treatments coded -1/+1; lines starting with '#' are metadata comments.
"""
import logging
import re
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from models.dataset import Dataset
from models.experiment import EvalSet

logger = logging.getLogger(__name__)

COVARIATE_PATTERN = re.compile(r'^x(\d+)$')
OPTIONAL_COLUMNS = ('f_opt', 'pi')


class DatasetFormatError(ValueError):
    """Malformed dataset CSV; the message names the offending rows or columns"""


def _covariate_columns(columns: List[str]) -> List[str]:
    found = sorted(
        ((int(m.group(1)), c) for c in columns if (m := COVARIATE_PATTERN.match(c))),
        key=lambda item: item[0]
    )
    if not found:
        raise DatasetFormatError("no covariate columns: expected x1,...,xp")
    indices = [i for i, _ in found]
    expected = list(range(1, len(found) + 1))
    if indices != expected:
        missing = sorted(set(expected) - set(indices))
        raise DatasetFormatError(f"covariate columns must be x1..x{len(found)}; missing {', '.join(f'x{i}' for i in missing)}")
    return [c for _, c in found]


def _bad_rows(frame: pd.DataFrame, column: str) -> List[int]:
    """1-based data-row numbers whose entry in `column` is not a finite number"""
    values = pd.to_numeric(frame[column], errors='coerce')
    bad = ~np.isfinite(values.to_numpy(dtype=float))
    return [int(i) + 1 for i in np.where(bad)[0]]


def read_dataset_csv(path: Union[str, Path]) -> EvalSet:
    """Parse a dataset CSV into an EvalSet (truth columns attached when present)"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset CSV not found: {path}")
    try:
        frame = pd.read_csv(path, comment='#', skipinitialspace=True, dtype=str, encoding='utf-8')
    except pd.errors.ParserError as e:
        raise DatasetFormatError(f"{path}: cannot parse CSV: {e}") from e
    except pd.errors.EmptyDataError as e:
        raise DatasetFormatError(f"{path}: file is empty") from e

    frame.columns = [str(c).strip() for c in frame.columns]
    for required in ('a', 'y'):
        if required not in frame.columns:
            raise DatasetFormatError(f"{path}: missing required column '{required}'")
    x_cols = _covariate_columns(list(frame.columns))
    if frame.empty:
        raise DatasetFormatError(f"{path}: no data rows")

    numeric_cols = x_cols + ['a', 'y'] + [c for c in OPTIONAL_COLUMNS if c in frame.columns]
    problems = []
    for column in numeric_cols:
        rows = _bad_rows(frame, column)
        if rows:
            shown = ', '.join(str(r) for r in rows[:10]) + (' ...' if len(rows) > 10 else '')
            problems.append(f"column '{column}' has non-numeric or missing values at row(s) {shown}")
    if problems:
        raise DatasetFormatError(f"{path}: " + '; '.join(problems))

    numeric = frame[numeric_cols].apply(pd.to_numeric)
    a = numeric['a'].to_numpy()
    bad_a = np.where(~np.isin(a, (-1, 1)))[0]
    if bad_a.size:
        raise DatasetFormatError(
            f"{path}: column 'a' must be -1 or 1; bad value(s) at row(s) {', '.join(str(i + 1) for i in bad_a[:10])}"
        )

    pi: Optional[np.ndarray] = None
    if 'pi' in numeric.columns:
        pi = numeric['pi'].to_numpy(dtype=float)
        bad_pi = np.where((pi <= 0) | (pi > 1))[0]
        if bad_pi.size:
            raise DatasetFormatError(
                f"{path}: column 'pi' must lie in (0,1]; bad value(s) at row(s) {', '.join(str(i + 1) for i in bad_pi[:10])}"
            )

    dataset = Dataset(numeric[x_cols].to_numpy(dtype=float), a.astype(int), numeric['y'].to_numpy(dtype=float))
    f_opt = numeric['f_opt'].to_numpy(dtype=float) if 'f_opt' in numeric.columns else None
    logger.info(f"Loaded {dataset!r} from {path} (truth: {'f_opt' if f_opt is not None else 'none'}, "
                f"pi: {'column' if pi is not None else 'absent'})")
    return EvalSet(dataset=dataset, f_opt=f_opt, pi=pi)


def dataset_frame(eval_set: EvalSet) -> pd.DataFrame:
    """Core-format table of an EvalSet"""
    dataset = eval_set.dataset
    frame = pd.DataFrame(dataset.covariates, columns=[f"x{j + 1}" for j in range(dataset.p)])
    frame['a'] = dataset.treatments
    frame['y'] = dataset.outcomes
    if eval_set.f_opt is not None:
        frame['f_opt'] = eval_set.f_opt
    if eval_set.pi is not None:
        frame['pi'] = eval_set.pi
    return frame


def write_dataset_csv(eval_set: EvalSet, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dataset_frame(eval_set).to_csv(path, index=False, float_format='%.17g')
    logger.info(f"Wrote {eval_set.dataset.n} records to {path}")
    return path
