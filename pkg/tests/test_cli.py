import io
import json
import math

import pandas as pd
import pytest

from main import EXIT_MODULE_ERROR, EXIT_USAGE_ERROR, main

FIT_CONFIG = {
    'model': 'Cosserat',
    'free': {'mu_c': [0.1, 10.0], 'Lc': [0.02, 2.0]},
    'fixed': {'mu': 1.0, 'mu_macro': 1 / 14, 'a1': 0.2, 'a3': 1 / 7},
    'synthetic': {
        'params': {'mu': 1.0, 'mu_macro': 1 / 14, 'mu_c': 0.5, 'a1': 0.2, 'a3': 1 / 7, 'Lc': 0.1},
        'radii': [0.01, 0.03, 0.1, 0.3, 1.0],
    },
}


def _csv(text):
    return pd.read_csv(io.StringIO(text))


def _error(capsys):
    lines = capsys.readouterr().err.splitlines()
    start = max(i for i, line in enumerate(lines) if line == '{')
    return json.loads('\n'.join(lines[start:]))


class TestUsageErrors:

    @pytest.mark.parametrize('argv', [
        ['curve'],
        ['compare', '--preset', 'cosserat'],
        ['plot', '--preset', 'cosserat'],
        ['curve', '--preset', 'granite'],
        ['curve', '--preset', 'cosserat', '--Lc-grid', '1:0:3'],
        ['curve', '--preset', 'cosserat', '--set', 'shear=1'],
        ['curve', '--preset', 'cosserat', '--R', '0'],
        ['verify', '--preset', 'cosserat', '--Lc-grid', 'inf:inf:1'],
        ['fit'],
    ])
    def test_exit_code(self, capsys, argv):
        assert main(argv) == EXIT_USAGE_ERROR
        assert capsys.readouterr().out == ''

    def test_missing_parameter_file(self, capsys, tmp_path):
        status = main(['curve', '--model', 'Cosserat', '--params', str(tmp_path / 'none.json')])
        assert status == EXIT_USAGE_ERROR
        assert 'File not found' in _error(capsys)['message']

    def test_malformed_fit_config(self, capsys, tmp_path):
        path = tmp_path / 'fit.json'
        path.write_text('{model', encoding='utf-8')
        assert main(['fit', '--fit-config', str(path)]) == EXIT_USAGE_ERROR
        assert _error(capsys)['error'] == 'JSONDecodeError'


class TestModuleErrors:

    def test_indefinite_parameters(self, capsys):
        assert main(['curve', '--preset', 'cosserat', '--set', 'a1=-1']) == EXIT_MODULE_ERROR
        assert _error(capsys)['error'] == 'ParameterDomainError'

    def test_failing_grid_point(self, capsys, tmp_path):
        out = tmp_path / 'verify.csv'
        argv = ['verify', '--preset', 'relaxed-vary-muc', '--Lc-grid', '0:0:1', '--out', str(out)]
        assert main(argv) == EXIT_MODULE_ERROR
        error = _error(capsys)
        assert error['error'] == 'GridPointError'
        assert error['index'] == 0
        assert not out.exists()


class TestCommands:

    def test_curve_at_zero_length_is_classical(self, capsys):
        assert main(['curve', '--preset', 'cosserat', '--Lc-grid', '0:1:3']) == 0
        table = _csv(capsys.readouterr().out)
        assert table['Lc'].tolist() == [0.0, 0.5, 1.0]
        assert table['T_w'].iloc[0] == pytest.approx(math.pi / 28, rel=1e-12)
        assert (table['T_c'] + table['T_m']).to_numpy() == pytest.approx(table['T_w'].to_numpy(), rel=1e-10)

    def test_repeat_runs_are_identical(self, tmp_path):
        paths = [tmp_path / 'a.csv', tmp_path / 'b.csv']
        for path in paths:
            argv = ['compare', '--preset', 'cosserat', '--model', 'Cosserat', '--model', 'Cauchy',
                    '--Lc-grid', '0.01:10:7:log', '--out', str(path)]
            assert main(argv) == 0
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_limits(self, capsys):
        assert main(['limits', '--preset', 'cosserat-conformal', '--format', 'json']) == 0
        [row] = json.loads(capsys.readouterr().out)['rows']
        assert row['Lc_inf'] == pytest.approx(5 * math.pi / 2)
        assert row['bounded'] is True

    def test_unbounded_limit_is_serialized(self, capsys):
        assert main(['limits', '--preset', 'cosserat', '--format', 'json']) == 0
        [row] = json.loads(capsys.readouterr().out)['rows']
        assert row['Lc_inf'] == 'inf'
        assert row['growth_coefficient'] == pytest.approx(24 / 47)

    def test_overrides_and_radius(self, capsys):
        argv = ['curve', '--model', 'Cauchy', '--set', 'mu_macro=1/2', '--R', '2', '--Lc-grid', '1:1:1']
        assert main(argv) == 0
        table = _csv(capsys.readouterr().out)
        assert table['T_w'].iloc[0] == pytest.approx(0.5 * math.pi * 16 / 2)

    def test_vary(self, capsys):
        argv = ['curve', '--preset', 'cosserat-sensitivity', '--vary', 'mu_c=1/5,1,5', '--Lc-grid', '0.1:1:2']
        assert main(argv) == 0
        table = _csv(capsys.readouterr().out)
        assert sorted(table['mu_c'].unique()) == pytest.approx([0.2, 1.0, 5.0])

    def test_profile(self, capsys):
        argv = ['profile', '--preset', 'cosserat', '--set', 'Lc=0.5', '--samples', '11']
        assert main(argv) == 0
        table = _csv(capsys.readouterr().out)
        assert len(table) == 11
        assert table['g_p'].iloc[-1] == pytest.approx(table['g1'].iloc[-1] + table['g2'].iloc[-1])

    def test_verify_reports_deviation(self, capsys):
        assert main(['verify', '--preset', 'cosserat', '--Lc-grid', '0.5:1:2']) == 0
        captured = capsys.readouterr()
        assert 'max relative deviation' in captured.err
        assert (_csv(captured.out)['err_T_w'] < 1e-6).all()

    def test_fit(self, capsys, tmp_path):
        config = tmp_path / 'fit.json'
        config.write_text(json.dumps(FIT_CONFIG), encoding='utf-8')
        assert main(['fit', '--fit-config', str(config), '--seed', '3']) == 0
        document = json.loads(capsys.readouterr().out)
        assert set(document) == {'rows', 'result', 'report'}
        assert document['result']['fitted_values']['Lc'] == pytest.approx(0.1, rel=1e-5)
        assert len(document['rows']) == 5

    def test_fit_seed_is_reproducible(self, capsys, tmp_path):
        config = tmp_path / 'fit.json'
        noisy = dict(FIT_CONFIG, synthetic=dict(FIT_CONFIG['synthetic'], noise=0.01))
        config.write_text(json.dumps(noisy), encoding='utf-8')
        outputs = []
        for _ in range(2):
            assert main(['fit', '--fit-config', str(config), '--seed', '3']) == 0
            outputs.append(capsys.readouterr().out)
        assert outputs[0] == outputs[1]
