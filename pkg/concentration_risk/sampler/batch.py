"""
Numbered portfolio batches with a manifest.
"""
import json
import logging
import os
from typing import Any, Dict, Optional

from concentration_risk.errors import InvalidParameterError
from concentration_risk.portfolio.io import save_portfolio
from concentration_risk.portfolio.models import ACTUARIAL, MODEL_KINDS
from concentration_risk.portfolio.transitions import TransitionMatrix, load_default_transition_matrix
from concentration_risk.sampler.config import SamplerConfig
from concentration_risk.sampler.generate import sample_actuarial_portfolio, sample_mtm_portfolio
from concentration_risk.stochastics.streams import RandomStream
from concentration_risk.validation.json_schema import JsonSchemaValidator

MANIFEST_NAME = 'manifest.json'
SAMPLER_STREAM = 10

logger = logging.getLogger(__name__)


def sample_portfolio(cfg: SamplerConfig, kind: str, stream: RandomStream,
                     matrix: Optional[TransitionMatrix] = None):
    """Draw one portfolio of either kind."""
    if kind == ACTUARIAL:
        return sample_actuarial_portfolio(cfg, stream)
    return sample_mtm_portfolio(cfg, matrix or load_default_transition_matrix(), stream)


def write_portfolio_batch(cfg: SamplerConfig, kind: str, count: int, seed: int, directory: str,
                          matrix: Optional[TransitionMatrix] = None) -> Dict[str, Any]:
    """
    Sample ``count`` portfolios into numbered CSV files plus a manifest.

    Portfolio i is drawn from substream i of the seed, so any prefix of a
    batch is reproducible on its own.

    Args:
        cfg: Sampler configuration
        kind: 'actuarial' or 'mtm'
        count: Number of portfolios
        seed: Batch seed
        directory: Output directory (created if missing)
        matrix: Transition matrix for MtM ratings

    Returns:
        Dict: Manifest as written
    """
    if kind not in MODEL_KINDS:
        raise InvalidParameterError(f"Unknown model kind '{kind}', expected one of {MODEL_KINDS}")
    if count < 0:
        raise InvalidParameterError(f"Portfolio count must be nonnegative, got {count}")
    os.makedirs(directory, exist_ok=True)
    stream = RandomStream(seed, SAMPLER_STREAM)

    files = []
    for index in range(count):
        portfolio = sample_portfolio(cfg, kind, stream.substream(index), matrix)
        name = f"portfolio_{index:05d}.csv"
        save_portfolio(portfolio, os.path.join(directory, name))
        files.append(name)

    manifest = {
        'kind': kind,
        'seed': seed,
        'count': count,
        'config_sha256': cfg.digest(),
        'files': files,
        'created_by': 'concentration_risk sample-portfolios',
    }
    JsonSchemaValidator().require(manifest, 'manifest', what='batch manifest')
    with open(os.path.join(directory, MANIFEST_NAME), 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2)
    logger.info(f"Wrote {count} {kind} portfolios to {directory}")
    return manifest
