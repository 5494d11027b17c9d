"""
Versioned JSON container for trained networks.

Arrays are stored row-major as base64 of little-endian float64 so that a
save/load cycle reproduces them bit for bit. The checksum is the SHA-256 of
the canonical JSON of every other field.
"""
import base64
import hashlib
import json
import logging
import os
from typing import Any, Dict, Optional

import numpy as np

from concentration_risk.errors import (KindMismatchError, ModelChecksumError, ModelFileError, ModelVersionError,
                                       SchemaViolationError)
from concentration_risk.neural.encoding import EncodingMeta
from concentration_risk.neural.mlp import ACTIVATION, MlpModel
from concentration_risk.validation.json_schema import JsonSchemaValidator

FORMAT = 'concentration-risk-mlp'
FORMAT_VERSION = 1
DTYPE = '<f8'

logger = logging.getLogger(__name__)


def _encode_array(array: np.ndarray) -> Dict[str, Any]:
    data = np.ascontiguousarray(array, dtype=DTYPE).tobytes()
    return {'shape': list(array.shape), 'dtype': DTYPE, 'data': base64.b64encode(data).decode('ascii')}


def _decode_array(payload: Dict[str, Any]) -> np.ndarray:
    shape = tuple(int(s) for s in payload['shape'])
    try:
        raw = base64.b64decode(payload['data'], validate=True)
    except ValueError as e:
        raise ModelChecksumError(f"Corrupt array payload: {str(e)}")
    count = int(np.prod(shape)) if shape else 1
    if len(raw) != count * 8:
        raise ModelChecksumError(f"Array payload holds {len(raw)} bytes, shape {shape} needs {count * 8}")
    return np.frombuffer(raw, dtype=DTYPE).reshape(shape).astype(float)


def _checksum(document: Dict[str, Any]) -> str:
    body = {key: value for key, value in document.items() if key != 'checksum'}
    canonical = json.dumps(body, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def model_to_dict(model: MlpModel) -> Dict[str, Any]:
    """Serializable document of a model, checksum included."""
    document = {
        'format': FORMAT,
        'version': FORMAT_VERSION,
        'encoding_meta': model.encoding_meta.to_dict(),
        'layer_sizes': list(model.layer_sizes),
        'activation': ACTIVATION,
        'layers': [{'weights': _encode_array(w), 'biases': _encode_array(b)}
                   for w, b in zip(model.weights, model.biases)],
    }
    document['checksum'] = _checksum(document)
    return document


def save_model(model: MlpModel, path: str) -> None:
    """
    Write a model file.

    Args:
        model: Network to save
        path: Target JSON file
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(model_to_dict(model), f)
    logger.info(f"Saved {model.model_kind} model with layer sizes {list(model.layer_sizes)} to {path}")


def load_model(path: str, expected_kind: Optional[str] = None) -> MlpModel:
    """
    Read and verify a model file.

    Args:
        path: JSON file written by save_model
        expected_kind: Model kind the caller is about to use the model for

    Returns:
        MlpModel: Model

    Raises:
        ModelChecksumError: Truncated file or checksum mismatch
        ModelVersionError: Unsupported format version
        ModelFileError: Missing file or invalid header
        KindMismatchError: If expected_kind differs from the stored kind
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            document = json.load(f)
    except FileNotFoundError:
        logger.error(f"Model file not found: {path}")
        raise ModelFileError(f"Model file not found: {path}")
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        logger.error(f"Unreadable model file {path}: {str(e)}")
        raise ModelChecksumError(f"Model file {path} is truncated or corrupt: {str(e)}")

    if not isinstance(document, dict) or document.get('format') != FORMAT:
        raise ModelFileError(f"{path} is not a {FORMAT} file")
    if document.get('version') != FORMAT_VERSION:
        raise ModelVersionError(f"{path} has format version {document.get('version')}, "
                                f"supported version is {FORMAT_VERSION}",
                                details={'version': document.get('version')})
    try:
        JsonSchemaValidator().require(document, 'model_header', what='model file')
    except SchemaViolationError as e:
        raise ModelFileError(e.message, details=e.details)
    expected = _checksum(document)
    if expected != document['checksum']:
        logger.error(f"Checksum mismatch in model file {path}")
        raise ModelChecksumError(f"Checksum mismatch in {path}",
                                 details={'stored': document['checksum'], 'computed': expected})

    meta = EncodingMeta.from_dict(document['encoding_meta'])
    if expected_kind is not None and meta.model_kind != expected_kind:
        raise KindMismatchError(f"{path} holds a {meta.model_kind} model, {expected_kind} requested")
    weights = [_decode_array(layer['weights']) for layer in document['layers']]
    biases = [_decode_array(layer['biases']) for layer in document['layers']]
    model = MlpModel(tuple(document['layer_sizes']), weights, biases, meta)
    logger.info(f"Loaded {meta.model_kind} model with {model.n_parameters} parameters from {path}")
    return model
