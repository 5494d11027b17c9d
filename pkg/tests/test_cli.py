"""
Tests for the command-line interface.
"""
import json
import logging
import math
import os

import pandas as pd
import pytest
import requests

from concentration_risk.analytic import ga_first_order_actuarial
from concentration_risk.cli import HANDLER_NAME, main
from concentration_risk.marketdata.fed import FederalReserveCurveClient
from concentration_risk.portfolio.io import load_portfolio, save_portfolio
from concentration_risk.portfolio.models import ACTUARIAL


@pytest.fixture(autouse=True)
def _drop_cli_handler():
    yield
    root = logging.getLogger()
    for handler in list(root.handlers):
        if handler.get_name() == HANDLER_NAME:
            root.removeHandler(handler)
    root.setLevel(logging.WARNING)


@pytest.fixture
def actuarial_csv(actuarial_portfolio, tmp_path):
    path = str(tmp_path / 'actuarial.csv')
    save_portfolio(actuarial_portfolio, path)
    return path


@pytest.fixture
def mtm_csv(mtm_portfolio, tmp_path):
    path = str(tmp_path / 'mtm.csv')
    save_portfolio(mtm_portfolio, path)
    return path


class TestUsage:

    @pytest.mark.parametrize('argv', [[], ['price'], ['ga', '--portfolio', 'x.csv'], ['ga', '--model', 'cva']])
    def test_usage_errors(self, argv, capsys):
        assert main(argv) == 1
        assert 'error' in capsys.readouterr().err

    def test_version(self, capsys):
        assert main(['--version']) == 0
        assert 'concentration_risk' in capsys.readouterr().out


class TestGa:

    def test_analytic(self, actuarial_csv, capsys):
        assert main(['ga', '--model', 'act', '--portfolio', actuarial_csv, '--method', 'analytic']) == 0
        expected = ga_first_order_actuarial(load_portfolio(actuarial_csv, ACTUARIAL), 0.25, 0.999)
        assert float(capsys.readouterr().out) == pytest.approx(expected)

    def test_analytic_percent(self, actuarial_csv, capsys):
        main(['ga', '--model', 'act', '--portfolio', actuarial_csv, '--method', 'analytic'])
        plain = float(capsys.readouterr().out)
        main(['ga', '--model', 'act', '--portfolio', actuarial_csv, '--method', 'analytic', '--percent'])
        assert float(capsys.readouterr().out) == pytest.approx(100.0 * plain)

    def test_exact_json(self, actuarial_csv, capsys):
        argv = ['ga', '--model', 'actuarial', '--portfolio', actuarial_csv, '--sims', '2000', '--seed', '4', '--json']
        assert main(argv) == 0
        data = json.loads(capsys.readouterr().out)
        assert data['model_kind'] == ACTUARIAL
        assert data['diagnostics']['n_sims'] == 2000
        assert 'exact' in data

    def test_mtm_analytic(self, mtm_csv, capsys):
        assert main(['ga', '--model', 'mtm', '--portfolio', mtm_csv, '--method', 'analytic']) == 0
        assert math.isfinite(float(capsys.readouterr().out))

    def test_output_file(self, actuarial_csv, tmp_path):
        output = str(tmp_path / 'out' / 'ga.txt')
        assert main(['ga', '--model', 'act', '--portfolio', actuarial_csv, '--method', 'analytic',
                     '--output', output]) == 0
        assert float(open(output, encoding='utf-8').read()) > 0.0

    def test_neural_needs_model(self, actuarial_csv):
        assert main(['ga', '--model', 'act', '--portfolio', actuarial_csv, '--method', 'nn']) == 2


class TestErrors:

    def test_missing_portfolio(self, tmp_path, capsys):
        assert main(['ga', '--model', 'act', '--portfolio', str(tmp_path / 'absent.csv')]) == 2
        assert 'error: ' in capsys.readouterr().err

    def test_json_errors(self, tmp_path, capsys):
        argv = ['ga', '--model', 'act', '--portfolio', str(tmp_path / 'absent.csv'), '--json-errors']
        assert main(argv) == 2
        lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith('{')]
        error = json.loads(lines[-1])
        assert error['exit_code'] == 2
        assert error['type'] == 'SchemaViolationError'

    def test_download_failure_is_a_data_error(self, monkeypatch, capsys):
        def offline(self, on):
            raise requests.ConnectionError('offline')

        monkeypatch.setattr(FederalReserveCurveClient, 'fetch_nss', offline)
        assert main(['curve', '--date', '2024-01-03', '--json-errors']) == 2
        lines = [line for line in capsys.readouterr().err.splitlines() if line.startswith('{')]
        error = json.loads(lines[-1])
        assert error['type'] == 'MarketDataError'
        assert 'offline' in error['message']


class TestVar:

    def test_plain(self, actuarial_csv, capsys):
        assert main(['var', '--model', 'act', '--portfolio', actuarial_csv, '--plain', '--sims', '2000']) == 0
        data = json.loads(capsys.readouterr().out)
        assert data['method'] == 'plain'
        assert data['n_sims'] == 2000
        assert data['effective_sample_size'] == pytest.approx(2000.0)
        assert 0.0 <= data['var'] <= 1.0

    def test_importance_sampling(self, actuarial_csv, tmp_path, capsys):
        paths = str(tmp_path / 'paths.csv')
        argv = ['var', '--model', 'act', '--portfolio', actuarial_csv, '--is', '--sims', '2000', '--paths-csv', paths]
        assert main(argv) == 0
        data = json.loads(capsys.readouterr().out)
        assert data['method'] == 'is'
        assert data['diagnostics']['tau'] > 0.0
        assert len(pd.read_csv(paths)) == 2000


class TestOtherCommands:

    def test_thresholds(self, capsys):
        assert main(['thresholds']) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0].startswith('grade,')
        assert len(lines) == 19

    def test_sample_portfolios(self, tmp_path, capsys):
        directory = str(tmp_path / 'batch')
        assert main(['sample-portfolios', '--model', 'mtm', '--count', '2', '--output', directory]) == 0
        assert json.loads(capsys.readouterr().out)['count'] == 2
        assert os.path.exists(os.path.join(directory, 'manifest.json'))
        assert os.path.exists(os.path.join(directory, 'portfolio_00001.csv'))

    def test_sample_needs_output(self):
        assert main(['sample-portfolios', '--model', 'act', '--count', '2']) == 2

    def test_sensitivity(self, actuarial_csv, tmp_path):
        directory = str(tmp_path / 'sens')
        assert main(['sensitivity', '--model', 'act', '--portfolio', actuarial_csv, '--output', directory]) == 0
        assert len(pd.read_csv(os.path.join(directory, 'deletions.csv'))) == 5

    def test_convergence(self, actuarial_csv, capsys):
        argv = ['convergence', '--model', 'act', '--portfolio', actuarial_csv, '--k-max', '2000', '--block', '1000']
        assert main(argv) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == 'k,plain_estimate,is_estimate'
        assert len(lines) == 3

    def test_prepare(self, tmp_path, capsys):
        exposures = tmp_path / 'exposures.csv'
        pd.DataFrame({'obligor_id': ['X1', 'X2'], 'exposure': [2.0, 1.0], 'rating': ['BBB', 'BB'],
                      'elgd': [0.45, 0.45]}).to_csv(exposures, index=False)
        directory = str(tmp_path / 'real')
        assert main(['prepare', '--exposures', str(exposures), '--output', directory]) == 0
        assert json.loads(capsys.readouterr().out)['omega_zero_pd'] == []
        assert load_portfolio(os.path.join(directory, 'actuarial.csv'), ACTUARIAL).n_obligors == 2
        assert os.path.exists(os.path.join(directory, 'mtm.csv'))
