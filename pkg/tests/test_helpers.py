import json
import math

import pandas as pd
import pytest

from core.data_loader import DataLoader
from core.errors import DomainError, ParameterDomainError
from utils import helpers


class TestParsing:

    @pytest.mark.parametrize('text,value', [
        ('0.25', 0.25),
        ('1/14', 1 / 14),
        (' 3 ', 3.0),
        ('inf', math.inf),
        ('1e-3', 1e-3),
    ])
    def test_numbers(self, text, value):
        assert helpers.parse_number(text) == value

    @pytest.mark.parametrize('text', ['abc', '1/0', ''])
    def test_bad_numbers(self, text):
        with pytest.raises(ParameterDomainError):
            helpers.parse_number(text)

    def test_linear_grid(self):
        assert helpers.parse_grid('0:1:5') == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])

    def test_log_grid(self):
        assert helpers.parse_grid('0.01:100:5:log') == pytest.approx([0.01, 0.1, 1.0, 10.0, 100.0])

    def test_single_point(self):
        assert helpers.parse_grid('0.5:0.5:1') == [0.5]

    @pytest.mark.parametrize('text', ['0:1', '0:1:0', '1:0:3', '0:1:3:cubic', '0:1:x', '0:inf:3',
                                      '0:1:3:log'])
    def test_bad_grids(self, text):
        with pytest.raises(DomainError):
            helpers.parse_grid(text)

    def test_assignment(self):
        assert helpers.parse_assignment('mu_c = 1/2') == ('mu_c', 0.5)
        assert helpers.parse_assignments(['Lc=inf', 'kappa_e=2']) == {'Lc': math.inf, 'kappa_e': 2.0}
        assert helpers.parse_assignments(None) == {}

    def test_bad_assignment(self):
        with pytest.raises(ParameterDomainError):
            helpers.parse_assignment('mu_c')
        with pytest.raises(ParameterDomainError) as info:
            helpers.parse_assignment('shear=1')
        assert info.value.fields == ['shear']


class TestThreadCap:

    def test_default(self, monkeypatch):
        monkeypatch.delenv(helpers.THREADS_ENV, raising=False)
        assert helpers.thread_cap(3) == 3

    def test_from_environment(self, monkeypatch):
        monkeypatch.setenv(helpers.THREADS_ENV, '4')
        assert helpers.thread_cap() == 4

    @pytest.mark.parametrize('raw', ['many', '0', '-2'])
    def test_ignores_bad_values(self, monkeypatch, raw):
        monkeypatch.setenv(helpers.THREADS_ENV, raw)
        assert helpers.thread_cap() == 1


class TestSerialization:

    TABLE = pd.DataFrame({'model': ['Cosserat'], 'Lc': [0.5], 'T_w': [math.inf]})

    def test_json_special_values(self):
        document = json.loads(helpers.to_json({'a': math.nan, 'b': -math.inf, 'c': [1.5]}))
        assert document == {'a': 'nan', 'b': '-inf', 'c': [1.5]}

    def test_csv_format(self):
        text = helpers.table_to_csv(pd.DataFrame({'Lc': [0.5]}))
        assert text == 'Lc\n5.0000000000000000e-01\n'

    def test_write_json(self, tmp_path):
        path = tmp_path / 'out.json'
        text = helpers.write_table(self.TABLE, str(path), 'json', extra={'max_deviation': 1e-9})
        assert path.read_text(encoding='utf-8') == text
        document = json.loads(text)
        assert document['rows'] == [{'model': 'Cosserat', 'Lc': 0.5, 'T_w': 'inf'}]
        assert document['max_deviation'] == 1e-9

    def test_write_is_deterministic(self):
        assert helpers.write_table(self.TABLE, None) == helpers.write_table(self.TABLE.copy(), None)

    def test_unknown_format(self):
        with pytest.raises(DomainError):
            helpers.write_table(self.TABLE, None, 'xlsx')


class TestRunConfigValidation:

    def test_valid(self):
        report = helpers.validate_run_config('curve', 1.0, [0.0, 1.0])
        assert report == {'valid': True, 'issues': [], 'warnings': []}

    @pytest.mark.parametrize('R', [None, 0.0, -1.0, math.inf])
    def test_radius(self, R):
        assert not helpers.validate_run_config('curve', R, [1.0])['valid']

    def test_grid(self):
        assert not helpers.validate_run_config('curve', 1.0, [])['valid']
        assert not helpers.validate_run_config('curve', 1.0, [-0.1, 1.0])['valid']
        assert helpers.validate_run_config('curve', 1.0, [0.1] * 2001)['warnings']

    def test_verify_needs_finite_lengths(self):
        assert helpers.validate_run_config('curve', 1.0, [math.inf])['valid']
        assert not helpers.validate_run_config('verify', 1.0, [math.inf])['valid']

    def test_files_and_format(self, tmp_path):
        report = helpers.validate_run_config('fit', 1.0, None, files=[str(tmp_path / 'missing.csv')], fmt='xml')
        assert len(report['issues']) == 2


class TestDataLoader:

    def test_observations(self, tmp_path):
        path = tmp_path / 'obs.csv'
        path.write_text(' R , T_w\n0.5,1.0\n1.0,2.0\n', encoding='utf-8')
        loader = DataLoader()
        data = loader.load_observations(str(path))
        assert list(data.columns) == ['R', 'T_w', 'weight']
        assert data['weight'].tolist() == [1.0, 1.0]
        metadata = loader.get_metadata()
        assert metadata['rows'] == 2
        assert metadata['file_name'] == 'obs.csv'

    def test_keeps_weights(self, tmp_path):
        path = tmp_path / 'obs.csv'
        path.write_text('R,T_w,weight,note\n0.5,1.0,2.0,a\n', encoding='utf-8')
        data = DataLoader().load_observations(str(path))
        assert data['weight'].tolist() == [2.0]

    def test_missing_columns(self, tmp_path):
        path = tmp_path / 'obs.csv'
        path.write_text('radius,torque\n1,2\n', encoding='utf-8')
        with pytest.raises(ParameterDomainError) as info:
            DataLoader().load_observations(str(path))
        assert info.value.fields == ['R', 'T_w']

    def test_non_numeric(self, tmp_path):
        path = tmp_path / 'obs.csv'
        path.write_text('R,T_w\n1,two\n', encoding='utf-8')
        with pytest.raises(DomainError):
            DataLoader().load_observations(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(DomainError):
            DataLoader().load_observations(str(tmp_path / 'none.csv'))

    def test_json_document(self, tmp_path):
        path = tmp_path / 'params.json'
        path.write_text(json.dumps({'mu_macro': 0.25, 'Lc': 1.0}), encoding='utf-8')
        assert DataLoader().load_json(str(path)) == {'mu_macro': 0.25, 'Lc': 1.0}

    def test_json_must_be_object(self, tmp_path):
        path = tmp_path / 'params.json'
        path.write_text('[1, 2]', encoding='utf-8')
        with pytest.raises(ParameterDomainError):
            DataLoader().load_json(str(path))
