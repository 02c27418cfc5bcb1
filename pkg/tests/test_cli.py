"""Command-line verbs and exit codes"""
import numpy as np
import pandas as pd
import pytest

import app
from models import EvalSet
from utils.dataset_io import write_dataset_csv

SIMULATE = ['simulate', '--scenario', 'linear', '--n', '60', '--n-test', '200', '--reps', '2', '--eps', '1,inf',
            '--seed', '3', '--workers', '1', '--no-tune']


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for var in ('DP2ERM_SEED', 'DP2ERM_OUT_DIR', 'DP2ERM_WORKERS', 'DP2ERM_RECORD_TIMING'):
        monkeypatch.delenv(var, raising=False)


def _report(output: str) -> dict:
    pairs = (line.split(': ', 1) for line in output.strip().splitlines() if ': ' in line)
    return {key: value for key, value in pairs}


@pytest.fixture
def data_csv(tmp_path, make_dataset, rng):
    dataset = make_dataset(120, 3, rng)
    return write_dataset_csv(EvalSet(dataset=dataset), tmp_path / 'data.csv')


def test_simulate_writes_reproducible_results(tmp_path):
    first, second = tmp_path / 'first', tmp_path / 'second'
    assert app.main(SIMULATE + ['--out', str(first)]) == 0
    assert app.main(SIMULATE + ['--out', str(second)]) == 0

    results = pd.read_csv(first / 'results.csv', comment='#')
    assert len(results) == 24
    assert set(results['scheme']) == {'ipw', 'mmd', 'ebw'}
    assert (results['status'] == 'ok').all()
    assert (first / 'results.csv').read_bytes() == (second / 'results.csv').read_bytes()
    assert (first / 'summary.csv').exists() and (first / 'metadata.txt').exists()
    assert (first / 'ebw_gamma.dat').exists()


def test_summarize_verb(tmp_path):
    out = tmp_path / 'run'
    assert app.main(SIMULATE + ['--out', str(out), '--scheme', 'ipw']) == 0
    target = tmp_path / 'again'
    assert app.main(['summarize', '--results', str(out / 'results.csv'), '--out', str(target)]) == 0
    summary = pd.read_csv(target / 'summary.csv', comment='#')
    assert len(summary) == 4
    assert (summary['replicates'] == 2).all()


def test_unknown_scenario_is_usage_error(tmp_path):
    argv = ['simulate', '--scenario', 'quadratic', '--seed', '1', '--out', str(tmp_path)]
    assert app.main(argv) == 1


def test_csv_without_outcome_column(tmp_path):
    path = tmp_path / 'bad.csv'
    path.write_text('x1,a\n0.1,1\n0.2,-1\n')
    assert app.main(['run', '--csv', str(path), '--seed', '1', '--workers', '1', '--out', str(tmp_path)]) == 1


def test_weights_verb(tmp_path, data_csv):
    out = tmp_path / 'weights'
    assert app.main(['weights', '--csv', str(data_csv), '--scheme', 'ebw', '--out', str(out)]) == 0
    weights = pd.read_csv(out / 'weights.csv', comment='#')['weight'].to_numpy()
    assert weights.shape == (120,)
    assert weights.sum() == pytest.approx(120.0, rel=1e-8)
    assert np.all(weights >= 0)


def test_weights_rejects_zero_mmd_ridge(tmp_path, data_csv):
    argv = ['weights', '--csv', str(data_csv), '--scheme', 'mmd', '--lambda-mmd', '0', '--out', str(tmp_path)]
    assert app.main(argv) == 1


def test_calibrate_gamma_report(capsys):
    argv = ['calibrate', '--eps', '0.1', '--zeta', '1', '--lam-tr', '2', '--w1', '300', '--w2', '300', '--n', '100']
    assert app.main(argv) == 0
    report = _report(capsys.readouterr().out)
    assert float(report['noise_scale']) == pytest.approx(6000.0)
    assert float(report['gamma_ridge']) == pytest.approx(2 * 2 * 300 / (0.1 * 100))
    assert report['provenance'] == 'explicit'


def test_calibrate_universal_budget(capsys):
    argv = ['calibrate', '--eps', '1', '--universal', '--n', '4', '--M', '1', '--M-out', '1']
    assert app.main(argv) == 0
    report = _report(capsys.readouterr().out)
    assert float(report['w1_bar']) == 12.0
    assert report['provenance'] == 'universal'


def test_calibrate_gaussian_needs_delta():
    argv = ['calibrate', '--eps', '1', '--mechanism', 'gaussian', '--universal', '--n', '10', '--zeta', '1']
    assert app.main(argv) == 1


def test_calibrate_needs_a_budget():
    assert app.main(['calibrate', '--eps', '1', '--n', '10', '--zeta', '1']) == 1


@pytest.mark.parametrize('argv', [
    [],
    ['weights', '--scheme', 'ipw'],
    ['calibrate', '--n', '10'],
    ['summarize'],
    ['simulate', '--reps', 'many'],
])
def test_missing_or_malformed_arguments(argv):
    assert app.main(argv) == 1
