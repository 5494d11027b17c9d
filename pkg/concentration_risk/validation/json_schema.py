"""
JSON schema validation for settings, curve, model and manifest documents.
"""
import json
import logging
import os
from typing import Any, Dict, Optional, Union

import jsonschema

from concentration_risk.errors import SchemaViolationError

SCHEMA_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'schemas')


class JsonSchemaValidator:
    """Validator for JSON documents using JSON Schema."""

    def __init__(self, schema_dir: Optional[str] = None):
        """
        Initialize the JSON schema validator.

        Args:
            schema_dir: Directory containing schema files (defaults to the packaged schemas)
        """
        self.schema_dir = schema_dir or SCHEMA_DIR
        self.logger = logging.getLogger(__name__)
        self.schema_cache: Dict[str, Dict[str, Any]] = {}

    def validate(self, data: Any, schema: Union[Dict[str, Any], str]) -> Dict[str, Any]:
        """
        Validate data against a JSON schema.

        Args:
            data: Document to validate
            schema: JSON schema as dictionary, schema name or path to schema file

        Returns:
            Dict: Validation result with 'valid' and 'errors' keys
        """
        if isinstance(schema, str):
            schema = self._load_schema(schema)

        result = {
            'valid': True,
            'errors': []
        }

        validator = jsonschema.Draft7Validator(schema)
        for error in sorted(validator.iter_errors(data), key=lambda e: list(e.path)):
            result['valid'] = False
            result['errors'].append({
                'message': error.message,
                'path': '.'.join(str(p) for p in error.path) if error.path else '',
                'schema_path': '.'.join(str(p) for p in error.schema_path) if error.schema_path else ''
            })

        if result['valid']:
            self.logger.debug("JSON validation successful")
        else:
            self.logger.warning(f"JSON validation failed: {result['errors'][0]['message']}")
        return result

    def require(self, data: Any, schema: Union[Dict[str, Any], str], what: str = 'document') -> None:
        """
        Validate data and raise when it does not conform.

        Args:
            data: Document to validate
            schema: JSON schema as dictionary, schema name or path
            what: Name of the document for the error message

        Raises:
            SchemaViolationError: If validation fails
        """
        result = self.validate(data, schema)
        if not result['valid']:
            first = result['errors'][0]
            location = f" at '{first['path']}'" if first['path'] else ''
            raise SchemaViolationError(
                f"Invalid {what}{location}: {first['message']}",
                details={'errors': result['errors']}
            )

    def _load_schema(self, schema_path: str) -> Dict[str, Any]:
        """
        Load a JSON schema from file.

        Args:
            schema_path: Schema name (resolved in schema_dir) or path to schema file

        Returns:
            Dict: JSON schema

        Raises:
            FileNotFoundError: If schema file is not found
            json.JSONDecodeError: If schema file is not valid JSON
        """
        if schema_path in self.schema_cache:
            return self.schema_cache[schema_path]

        if not schema_path.endswith('.json'):
            full_path = os.path.join(self.schema_dir, f"{schema_path}.json")
        else:
            full_path = schema_path

        try:
            with open(full_path, 'r', encoding='utf-8') as f:
                schema = json.load(f)
        except FileNotFoundError:
            self.logger.error(f"Schema file not found: {full_path}")
            raise
        except json.JSONDecodeError as e:
            self.logger.error(f"Invalid JSON schema file: {full_path} - {str(e)}")
            raise

        self.schema_cache[schema_path] = schema
        self.logger.debug(f"Loaded JSON schema from {full_path}")
        return schema
