"""
Tests for the tabular validators and the JSON schema validator.
"""
import json

import numpy as np
import pandas as pd
import pytest

from concentration_risk.errors import SchemaViolationError
from concentration_risk.validation.json_schema import JsonSchemaValidator
from concentration_risk.validation.validators import Validators


@pytest.fixture
def validators():
    return Validators()


def test_validate_columns(validators):
    frame = pd.DataFrame({'obligor_id': ['O001'], 'exposure': [1.0]})
    assert validators.validate_columns(frame, ['obligor_id', 'exposure'])['valid']
    result = validators.validate_columns(frame, ['obligor_id', 'exposure', 'pd'])
    assert not result['valid']
    assert result['missing'] == ['pd']


def test_validate_range_bounds(validators):
    result = validators.validate_range([0.0, 0.5, 1.0, 1.2], 'pd', 0.0, 1.0)
    assert not result['valid']
    assert result['rows'] == [3]
    assert 'pd' in result['message']


def test_validate_range_exclusive_bounds(validators):
    result = validators.validate_range(np.array([0.0, 0.3, 1.0]), 'rho', 0.0, 1.0,
                                       lower_inclusive=False, upper_inclusive=False)
    assert result['rows'] == [0, 2]
    assert result['expected'] == '(0.0, 1.0)'


def test_validate_range_flags_nan(validators):
    assert validators.validate_range([np.nan], 'exposure', 0.0)['rows'] == [0]


def test_validate_nonnegative(validators):
    matrix = np.array([[1.0, 0.0], [-0.1, 1.1]])
    result = validators.validate_nonnegative(matrix)
    assert not result['valid']
    assert result['cells'] == [(1, 0)]


def test_validate_row_sums(validators):
    matrix = np.array([[0.5, 0.5], [0.2, 0.7]])
    result = validators.validate_row_sums(matrix, 1e-9)
    assert result['rows'] == [1]
    assert validators.validate_row_sums(matrix, 0.2)['valid']


SCHEMA = {
    'type': 'object',
    'properties': {'rate': {'type': 'number'}},
    'required': ['rate'],
}


def test_json_validate_with_dict_schema():
    validator = JsonSchemaValidator()
    assert validator.validate({'rate': 0.01}, SCHEMA)['valid']
    result = validator.validate({'rate': 'high'}, SCHEMA)
    assert not result['valid']
    assert result['errors'][0]['path'] == 'rate'


def test_json_require_raises():
    with pytest.raises(SchemaViolationError) as info:
        JsonSchemaValidator().require({}, SCHEMA, what='curve')
    assert 'curve' in info.value.message
    assert info.value.details['errors']


def test_packaged_schema_by_name():
    validator = JsonSchemaValidator()
    assert validator.validate({'kind': 'flat', 'rate': 0.02}, 'yield_curve')['valid']
    assert not validator.validate({'kind': 'flat'}, 'yield_curve')['valid']
    assert 'yield_curve' in validator.schema_cache


def test_schema_file_path(tmp_path):
    path = tmp_path / 'rate.json'
    path.write_text(json.dumps(SCHEMA), encoding='utf-8')
    assert JsonSchemaValidator().validate({'rate': 1}, str(path))['valid']


def test_missing_schema_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        JsonSchemaValidator(str(tmp_path)).validate({}, 'absent')
