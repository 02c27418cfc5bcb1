"""Dataset CSV ingest and result files"""
import math

import numpy as np
import pandas as pd
import pytest
from openpyxl import load_workbook

from bench import plot_data, summarize
from models import EvalSet, ResultRow, WeightVector
from utils.dataset_io import DatasetFormatError, read_dataset_csv, write_dataset_csv
from utils.result_store import ResultStore, metadata_header, read_results


def _write(tmp_path, text, name='data.csv'):
    path = tmp_path / name
    path.write_text(text)
    return path


# ==================== Dataset CSV ====================

def test_read_with_truth_columns(tmp_path):
    path = _write(tmp_path, "# source: unit test\nx2,x1,a,y,f_opt,pi\n0.5,0.1,1,2.0,1.5,0.4\n-0.5,0.2,-1,1.0,-1.0,0.6\n")
    eval_set = read_dataset_csv(path)
    assert np.allclose(eval_set.dataset.covariates, [[0.1, 0.5], [0.2, -0.5]])
    assert eval_set.dataset.treatments.tolist() == [1, -1]
    assert np.allclose(eval_set.f_opt, [1.5, -1.0])
    assert np.allclose(eval_set.pi, [0.4, 0.6])


def test_write_then_read_preserves_values(tmp_path, dataset):
    path = write_dataset_csv(EvalSet(dataset=dataset), tmp_path / 'nested' / 'out.csv')
    assert read_dataset_csv(path).dataset == dataset


@pytest.mark.parametrize('text, message', [
    ("x1,a\n0.1,1\n", "missing required column 'y'"),
    ("a,y\n1,2.0\n", "no covariate columns"),
    ("x1,x3,a,y\n0.1,0.2,1,2.0\n", "missing x2"),
    ("x1,a,y\n0.1,0,2.0\n", "column 'a' must be -1 or 1"),
    ("x1,a,y\n0.1,1,abc\n0.2,-1,\n", "column 'y' has non-numeric or missing values at row(s) 1, 2"),
    ("x1,a,y,pi\n0.1,1,2.0,0\n", "column 'pi' must lie in (0,1]"),
    ("x1,a,y\n", "no data rows"),
])
def test_malformed_csv(tmp_path, text, message):
    with pytest.raises(DatasetFormatError) as error:
        read_dataset_csv(_write(tmp_path, text))
    assert message in str(error.value)


def test_missing_csv(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_dataset_csv(tmp_path / 'absent.csv')


# ==================== Result files ====================

def _rows():
    return [
        ResultRow(replicate=0, scheme='ebw', mechanism='gamma', epsilon=math.inf, accuracy=0.75, value=1.25,
                  noise_scale=0.0, gamma_ridge=0.0, w1_bar=3.0, w2_bar=4.0, seed=9),
        ResultRow(replicate=1, scheme='ebw', mechanism='gamma', epsilon=math.inf, accuracy=0.25, value=0.5,
                  noise_scale=0.0, gamma_ridge=0.0, w1_bar=3.0, w2_bar=4.0, seed=9),
        ResultRow(replicate=1, scheme='ipw', mechanism='gamma', epsilon=0.1, accuracy=None, value=None,
                  noise_scale=None, gamma_ridge=None, w1_bar=None, w2_bar=None, seed=9, status='error: failed'),
    ]


def test_metadata_header():
    header = metadata_header({'seed': 9, 'grids': {'lambda1': (1.0, 5.0)}, 'epsilon': math.inf})
    lines = header.splitlines()
    assert lines[0].startswith('# version: ')
    assert '# seed: 9' in lines
    assert '# grids.lambda1: 1.0,5.0' in lines
    assert '# epsilon: inf' in lines


def test_results_round_trip(tmp_path):
    store = ResultStore(tmp_path / 'out')
    path = store.write_results(_rows(), {'seed': 9})
    text = path.read_text()
    assert text.startswith('# version: ')
    assert '0,ebw,gamma,inf,0.75,1.25' in text
    frame = read_results(path)
    assert len(frame) == 3
    assert math.isinf(frame['epsilon'].iloc[0])
    assert frame['status'].tolist() == ['ok', 'ok', 'error: failed']
    assert pd.isna(frame['accuracy'].iloc[2])


def test_read_results_requires_columns(tmp_path):
    path = _write(tmp_path, "replicate,scheme\n0,ebw\n", name='results.csv')
    with pytest.raises(ValueError, match="missing column"):
        read_results(path)


def test_summary_plot_data_and_workbook(tmp_path):
    store = ResultStore(tmp_path)
    summary = summarize(_rows())
    summary_path = store.write_summary(summary, {'seed': 9})
    assert 'ebw,gamma,inf,2,0.5,' in summary_path.read_text()

    paths = store.write_plot_data(plot_data(summary), {'seed': 9})
    assert [p.name for p in paths] == ['ebw_gamma.dat']
    body = [line for line in paths[0].read_text().splitlines() if not line.startswith('#')]
    assert body[0] == 'epsilon mean_acc sd_acc'
    assert body[1].startswith('inf 0.5 ')

    workbook_path = store.write_workbook(summary, {'seed': 9})
    workbook = load_workbook(workbook_path)
    assert workbook.sheetnames == ['summary', 'metadata']
    assert workbook['summary']['C2'].value == 'inf'


def test_weights_file(tmp_path):
    store = ResultStore(tmp_path)
    weights = WeightVector([0.5, 1.5], scheme='ebw', diagnostics={'iterations': 12})
    path = store.write_weights(weights, {'command': 'weights'})
    text = path.read_text()
    assert '# diagnostics.iterations: 12' in text
    assert pd.read_csv(path, comment='#')['weight'].tolist() == [0.5, 1.5]
