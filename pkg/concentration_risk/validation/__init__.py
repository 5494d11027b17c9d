"""
Validation helpers for settings, files and portfolio data.
"""
from concentration_risk.validation.json_schema import JsonSchemaValidator
from concentration_risk.validation.validators import Validators

__all__ = ['JsonSchemaValidator', 'Validators']
