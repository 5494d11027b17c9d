"""
Settings loading for the granularity adjustment engine.

Defaults live in ``config/default.json`` next to this module. A user file in
JSON or TOML is deep-merged over them and the result is schema-checked.
"""
import copy
import json
import logging
import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from typing import Any, Dict, Optional

from concentration_risk.errors import SchemaViolationError
from concentration_risk.validation.json_schema import JsonSchemaValidator

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'config')
DEFAULT_CONFIG = os.path.join(CONFIG_DIR, 'default.json')

logger = logging.getLogger(__name__)


def deep_merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """
    Merge two nested dictionaries, values from override winning.

    Args:
        base: Base dictionary (not modified)
        override: Overriding dictionary

    Returns:
        Dict: Merged copy
    """
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def _read_file(path: str) -> Dict[str, Any]:
    try:
        if path.endswith('.toml'):
            with open(path, 'rb') as f:
                return tomllib.load(f)
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except FileNotFoundError:
        logger.error(f"Settings file not found: {path}")
        raise SchemaViolationError(f"Settings file not found: {path}")
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as e:
        logger.error(f"Invalid settings file: {path} - {str(e)}")
        raise SchemaViolationError(f"Invalid settings file {path}: {str(e)}")


def load_settings(path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """
    Load the effective settings tree.

    Args:
        path: Optional JSON or TOML file merged over the defaults
        overrides: Optional dictionary merged last (e.g. from CLI flags)

    Returns:
        Dict: Validated settings

    Raises:
        SchemaViolationError: If a file cannot be read or the merged tree is invalid
    """
    settings = _read_file(DEFAULT_CONFIG)
    if path:
        settings = deep_merge(settings, _read_file(path))
        logger.info(f"Loaded settings from {path}")
    if overrides:
        settings = deep_merge(settings, overrides)

    validator = JsonSchemaValidator()
    validator.require(settings, 'settings', what='settings')
    validator.require(settings['curve'], 'yield_curve', what='curve settings')
    return settings
