"""
Training of the neural GA model: labelled portfolio generation with a disk
cache, mini-batch Adam over squared error and best-checkpoint selection.
"""
import hashlib
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from concentration_risk.engines.context import EngineContext
from concentration_risk.errors import (ConcentrationRiskError, InvalidParameterError, LabelFailureError,
                                       TooManyObligorsError, TrainingDivergedError)
from concentration_risk.neural.encoding import GA_FEATURE_SCALE, TARGET_SCALE, EncodingMeta, encode
from concentration_risk.neural.mlp import MlpModel
from concentration_risk.neural.optim import Adam
from concentration_risk.portfolio.models import DEFAULT_MAX_OBLIGORS, MODEL_KINDS, MTM
from concentration_risk.sampler.batch import sample_portfolio
from concentration_risk.sampler.config import SamplerConfig
from concentration_risk.stochastics.streams import RandomStream

TRAINING_STREAM = 20
INIT_STREAM = 21
SHUFFLE_STREAM = 22
HISTORY_COLUMNS = ('iter', 'loss', 'label', 'pred')

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters."""

    n_iter: int = 10000
    sims_per_label: int = 200000
    learning_rate: float = 1e-4
    betas: Tuple[float, float] = (0.9, 0.999)
    batch_size: int = 32
    seed: int = 0
    checkpoint_every: int = 50
    hidden: Tuple[int, ...] = (512, 512, 512, 512, 512)
    epochs: int = 1
    validation_fraction: float = 0.05
    ga_feature_scale: float = GA_FEATURE_SCALE
    target_scale: float = TARGET_SCALE
    max_label_failure_rate: float = 0.01
    divergence_limit: float = 1e6
    max_obligors: int = DEFAULT_MAX_OBLIGORS
    threads: int = 1
    label_cache_dir: Optional[str] = None
    history_path: Optional[str] = None
    progress: bool = field(default=True, compare=False)

    def __post_init__(self):
        for name in ('n_iter', 'sims_per_label', 'batch_size', 'checkpoint_every', 'epochs', 'max_obligors',
                     'threads'):
            if int(getattr(self, name)) < 1:
                raise InvalidParameterError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise InvalidParameterError(f"validation_fraction must lie in [0, 1), got {self.validation_fraction}")
        if self.learning_rate <= 0.0 or self.divergence_limit <= 0.0:
            raise InvalidParameterError("Learning rate and divergence limit must be positive")
        object.__setattr__(self, 'hidden', tuple(int(h) for h in self.hidden))
        object.__setattr__(self, 'betas', tuple(float(b) for b in self.betas))

    @classmethod
    def from_settings(cls, settings: Dict[str, Any], **overrides: Any) -> 'TrainConfig':
        """Build from the ``training`` section plus global seed, threads and max_obligors."""
        section = dict(settings['training'])
        section.update({
            'seed': settings['seed'],
            'threads': settings['threads'],
            'max_obligors': settings['portfolio']['max_obligors'],
        })
        section.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**section)


@dataclass
class LabelSet:
    """Encoded training portfolios with their Monte Carlo labels."""

    features: np.ndarray
    labels: np.ndarray
    ga1st: np.ndarray
    failed: int = 0

    def __len__(self) -> int:
        return int(self.labels.size)


def label_seed(seed: int, index: int, offset: int = 0) -> int:
    """Monte Carlo seed of the label of portfolio ``index``."""
    state = np.random.SeedSequence([int(seed), int(offset), int(index)]).generate_state(1, np.uint64)
    return int(state[0])


def _cache_key(model_kind: str, cfg: TrainConfig, sampler_cfg: SamplerConfig, engines: EngineContext,
               meta: EncodingMeta) -> str:
    key = {
        'kind': model_kind,
        'seed': cfg.seed,
        'sims_per_label': cfg.sims_per_label,
        'sampler': sampler_cfg.digest(),
        'engines': engines.describe(),
        'encoding': meta.to_dict(),
    }
    return hashlib.sha256(json.dumps(key, sort_keys=True, default=str).encode('utf-8')).hexdigest()


def _cache_path(directory: str, index: int) -> str:
    return os.path.join(directory, f"label_{index:06d}.npz")


def _read_cache(path: str, key: str) -> Optional[Tuple[np.ndarray, float, float]]:
    if not os.path.exists(path):
        return None
    try:
        with np.load(path) as data:
            if str(data['key']) != key:
                return None
            return data['features'], float(data['label']), float(data['ga1st'])
    except (OSError, KeyError, ValueError) as e:
        logger.warning(f"Ignoring unreadable label cache entry {path}: {str(e)}")
        return None


def generate_labels(model_kind: str, cfg: TrainConfig, sampler_cfg: SamplerConfig, engines: EngineContext,
                    meta: EncodingMeta) -> LabelSet:
    """
    Sample, label and encode ``cfg.n_iter`` portfolios.

    Portfolio i comes from substream i of the training stream and its label
    from a seed derived from (seed, i), so results do not depend on worker
    timing. Failed labels are skipped.

    Raises:
        LabelFailureError: If more than ``max_label_failure_rate`` of the labels fail
    """
    label_engines = engines.with_sims(cfg.sims_per_label).with_threads(1)
    stream = RandomStream(cfg.seed, TRAINING_STREAM)
    key = _cache_key(model_kind, cfg, sampler_cfg, engines, meta)
    if cfg.label_cache_dir:
        os.makedirs(cfg.label_cache_dir, exist_ok=True)

    def compute(index: int) -> Tuple[np.ndarray, float, float]:
        path = _cache_path(cfg.label_cache_dir, index) if cfg.label_cache_dir else None
        if path:
            cached = _read_cache(path, key)
            if cached is not None:
                return cached
        portfolio = sample_portfolio(sampler_cfg, model_kind, stream.substream(index), engines.matrix)
        try:
            ga1st = engines.ga_analytic(portfolio)
            label = label_engines.with_seed(label_seed(cfg.seed, index)).ga_exact(portfolio).exact
            features = encode(portfolio, ga1st, meta)
        except ConcentrationRiskError as e:
            logger.warning(f"Skipping training portfolio {index}: {e.message}")
            features, label, ga1st = np.zeros(meta.width), math.nan, math.nan
        if path:
            np.savez(path, features=features, label=label, ga1st=ga1st, key=key)
        return features, label, ga1st

    with ThreadPoolExecutor(max_workers=cfg.threads) as executor:
        results = list(tqdm(executor.map(compute, range(cfg.n_iter)), total=cfg.n_iter, desc="Labels",
                            disable=not cfg.progress))

    features = np.array([r[0] for r in results]).reshape(cfg.n_iter, meta.width)
    labels = np.array([r[1] for r in results])
    ga1st = np.array([r[2] for r in results])
    ok = np.isfinite(labels)
    failed = int(cfg.n_iter - ok.sum())
    if failed:
        logger.warning(f"Skipped {failed} of {cfg.n_iter} training labels")
    if failed > cfg.max_label_failure_rate * cfg.n_iter:
        logger.error(f"{failed} of {cfg.n_iter} training labels failed")
        raise LabelFailureError(f"{failed} of {cfg.n_iter} training labels failed",
                                details={'failed': failed, 'n_iter': cfg.n_iter})
    return LabelSet(features[ok], labels[ok], ga1st[ok], failed)


def split_indices(n: int, fraction: float, generator: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Random (train, validation) index split keeping at least one training sample."""
    n_valid = min(int(math.floor(n * fraction)), n - 1) if fraction > 0.0 else 0
    if fraction > 0.0 and n > 1:
        n_valid = max(n_valid, 1)
    order = generator.permutation(n)
    return np.sort(order[n_valid:]), np.sort(order[:n_valid])


def validation_loss(model: MlpModel, features: np.ndarray, targets: np.ndarray) -> float:
    outputs, _ = model.forward_batch(features)
    return float(np.mean((outputs - targets) ** 2))


def fit(model: MlpModel, features: np.ndarray, targets: np.ndarray, cfg: TrainConfig,
        generator: np.random.Generator, valid_features: Optional[np.ndarray] = None,
        valid_targets: Optional[np.ndarray] = None) -> pd.DataFrame:
    """
    Minimize mean squared error by mini-batch Adam.

    The first epoch visits samples in the given order, later epochs in a
    fresh permutation. With validation data the parameters with the lowest
    validation loss seen at a checkpoint are restored at the end.

    Args:
        model: Network, updated in place
        features: Training inputs, one row per sample
        targets: Scaled training targets
        cfg: Hyperparameters
        generator: Source of the epoch permutations
        valid_features: Optional validation inputs
        valid_targets: Optional scaled validation targets

    Returns:
        pd.DataFrame: History with columns iter, loss, label, pred (label and pred unscaled)

    Raises:
        TrainingDivergedError: If a batch loss is not finite or exceeds the divergence limit
    """
    optimizer = Adam(model.parameters(), cfg.learning_rate, cfg.betas)
    has_validation = valid_features is not None and len(valid_features) > 0
    best_loss, best_parameters = math.inf, None
    rows = []
    step = 0
    n = len(targets)

    def checkpoint():
        nonlocal best_loss, best_parameters
        current = validation_loss(model, valid_features, valid_targets)
        if current < best_loss:
            best_loss, best_parameters = current, model.copy_parameters()
            logger.debug(f"Checkpoint at step {step}: validation loss {current:.6g}")

    for epoch in range(cfg.epochs):
        order = np.arange(n) if epoch == 0 else generator.permutation(n)
        batches = range(0, n, cfg.batch_size)
        for start in tqdm(batches, desc=f"Epoch {epoch + 1}", disable=not cfg.progress):
            batch = order[start:start + cfg.batch_size]
            outputs, activations = model.forward_batch(features[batch])
            residual = outputs - targets[batch]
            loss = float(np.mean(residual ** 2))
            if not math.isfinite(loss) or loss > cfg.divergence_limit:
                logger.error(f"Training diverged at step {step}: loss {loss}")
                raise TrainingDivergedError(f"Training diverged at step {step} with loss {loss}",
                                            details={'iter': step, 'loss': loss, 'epoch': epoch})
            optimizer.step(model.backward(activations, 2.0 * residual / residual.size))
            rows.append((step, loss, targets[batch[0]] / model.encoding_meta.target_scale,
                         outputs[0] / model.encoding_meta.target_scale))
            step += 1
            if has_validation and step % cfg.checkpoint_every == 0:
                checkpoint()

    if has_validation:
        checkpoint()
    if best_parameters is not None:
        model.load_parameters(best_parameters)
        logger.info(f"Restored best checkpoint with validation loss {best_loss:.6g}")
    return pd.DataFrame(rows, columns=list(HISTORY_COLUMNS))


def train(model_kind: str, cfg: TrainConfig, sampler_cfg: SamplerConfig, engines: EngineContext) -> MlpModel:
    """
    Train a neural GA model on synthetic portfolios.

    Labels are exact Monte Carlo GAs with ``cfg.sims_per_label`` paths, the
    first-order analytic GA is the last input feature and targets are
    scaled by ``cfg.target_scale``.

    Args:
        model_kind: 'actuarial' or 'mtm'
        cfg: Training hyperparameters
        sampler_cfg: Distribution of training portfolios
        engines: Model parameters for labels and analytic features

    Returns:
        MlpModel: Trained model with its loss history attached
    """
    if model_kind not in MODEL_KINDS:
        raise InvalidParameterError(f"Unknown model kind '{model_kind}', expected one of {MODEL_KINDS}")
    if sampler_cfg.n_max > cfg.max_obligors:
        raise TooManyObligorsError(
            f"Sampler draws up to {sampler_cfg.n_max} obligors, the encoding holds {cfg.max_obligors}")
    meta = EncodingMeta.for_kind(model_kind, cfg.max_obligors,
                                 n_states=engines.matrix.n_states if model_kind == MTM else None,
                                 ga_feature_scale=cfg.ga_feature_scale, target_scale=cfg.target_scale)
    logger.info(f"Training {model_kind} model on {cfg.n_iter} portfolios, hidden layers {list(cfg.hidden)}")

    labels = generate_labels(model_kind, cfg, sampler_cfg, engines, meta)
    targets = labels.labels * cfg.target_scale
    shuffle = RandomStream(cfg.seed, SHUFFLE_STREAM).generator()
    train_idx, valid_idx = split_indices(len(labels), cfg.validation_fraction, shuffle)
    logger.info(f"Training on {train_idx.size} portfolios, validating on {valid_idx.size}")

    model = MlpModel.initialize(meta, cfg.hidden, RandomStream(cfg.seed, INIT_STREAM).generator())
    history = fit(model, labels.features[train_idx], targets[train_idx], cfg, shuffle,
                  labels.features[valid_idx], targets[valid_idx])
    model.history = history
    if cfg.history_path:
        directory = os.path.dirname(os.path.abspath(cfg.history_path))
        os.makedirs(directory, exist_ok=True)
        history.to_csv(cfg.history_path, index=False)
        logger.info(f"Wrote training history to {cfg.history_path}")
    logger.info(f"Trained {model_kind} model, final batch loss {history['loss'].iloc[-1]:.6g}")
    return model

