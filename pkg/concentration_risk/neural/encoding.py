"""
Fixed-width feature vectors of portfolios for the neural GA model.

Obligors are sorted by descending exposure share (remaining fields break
ties) and every per-obligor block is zero-padded to ``max_obligors``.
"""
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from concentration_risk.errors import InvalidParameterError, KindMismatchError, TooManyObligorsError, WidthMismatchError
from concentration_risk.portfolio.models import ACTUARIAL, DEFAULT_MAX_OBLIGORS, MODEL_KINDS, MTM, Portfolio

ACTUARIAL_BLOCKS = ('share', 'pd', 'elgd', 'omega')
MTM_BLOCKS = ('share', 'elgd', 'rho', 'coupon', 'grade', 'maturity')
ORDERING = 'share-descending'
GA_FEATURE_SCALE = 10.0
TARGET_SCALE = 10.0
# exact in binary, so decoding recovers maturities bit for bit
MATURITY_SCALE = 0.125

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EncodingMeta:
    """Layout and normalization constants of an encoding, stored with the model."""

    model_kind: str
    max_obligors: int = DEFAULT_MAX_OBLIGORS
    blocks: Tuple[str, ...] = ACTUARIAL_BLOCKS
    ordering: str = ORDERING
    ga_feature_scale: float = GA_FEATURE_SCALE
    target_scale: float = TARGET_SCALE
    block_scales: Dict[str, float] = field(default_factory=dict)
    n_states: Optional[int] = None

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise InvalidParameterError(f"Unknown model kind '{self.model_kind}'")
        if self.max_obligors < 1:
            raise InvalidParameterError(f"max_obligors must be positive, got {self.max_obligors}")
        if self.model_kind == MTM and not self.n_states:
            raise InvalidParameterError("MtM encoding needs the number of non-default grades")
        object.__setattr__(self, 'blocks', tuple(self.blocks))

    @classmethod
    def for_kind(cls, model_kind: str, max_obligors: int = DEFAULT_MAX_OBLIGORS, n_states: Optional[int] = None,
                 ga_feature_scale: float = GA_FEATURE_SCALE, target_scale: float = TARGET_SCALE) -> 'EncodingMeta':
        """Default layout of a model kind."""
        if model_kind == ACTUARIAL:
            return cls(ACTUARIAL, max_obligors, ACTUARIAL_BLOCKS, ga_feature_scale=ga_feature_scale,
                       target_scale=target_scale)
        return cls(MTM, max_obligors, MTM_BLOCKS, ga_feature_scale=ga_feature_scale, target_scale=target_scale,
                   block_scales={'maturity': MATURITY_SCALE}, n_states=n_states)

    @property
    def width(self) -> int:
        """Input width len(blocks) * max_obligors + 1."""
        return len(self.blocks) * self.max_obligors + 1

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['blocks'] = list(self.blocks)
        if data['n_states'] is None:
            del data['n_states']
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'EncodingMeta':
        return cls(model_kind=data['model_kind'], max_obligors=int(data['max_obligors']),
                   blocks=tuple(data['blocks']), ordering=data['ordering'],
                   ga_feature_scale=float(data['ga_feature_scale']), target_scale=float(data['target_scale']),
                   block_scales=dict(data.get('block_scales', {})), n_states=data.get('n_states'))


def _columns(portfolio: Portfolio, meta: EncodingMeta) -> Dict[str, np.ndarray]:
    if portfolio.model_kind == ACTUARIAL:
        return {'share': portfolio.shares, 'pd': portfolio.pds, 'elgd': portfolio.elgds, 'omega': portfolio.omegas}
    return {
        'share': portfolio.shares,
        'elgd': portfolio.elgds,
        'rho': portfolio.rhos,
        'coupon': portfolio.coupons,
        'grade': portfolio.ratings / float(meta.n_states),
        'maturity': portfolio.maturities * meta.block_scales.get('maturity', 1.0),
    }


def _encode(portfolio: Portfolio, ga1st: float, meta: EncodingMeta) -> np.ndarray:
    if portfolio.model_kind != meta.model_kind:
        raise KindMismatchError(f"Cannot encode a {portfolio.model_kind} portfolio with a {meta.model_kind} layout")
    if portfolio.n_obligors > meta.max_obligors:
        raise TooManyObligorsError(
            f"Portfolio holds {portfolio.n_obligors} obligors, encoding allows {meta.max_obligors}")
    columns = _columns(portfolio, meta)
    # lexsort sorts by the last key first
    keys = [columns[name] for name in reversed(meta.blocks[1:])] + [-columns['share']]
    order = np.lexsort(keys)

    features = np.zeros(meta.width)
    count = portfolio.n_obligors
    for position, name in enumerate(meta.blocks):
        start = position * meta.max_obligors
        features[start:start + count] = columns[name][order]
    features[-1] = ga1st * meta.ga_feature_scale
    return features


def encode_actuarial(portfolio: Portfolio, ga1st: float, meta: Optional[EncodingMeta] = None) -> np.ndarray:
    """
    Feature vector (shares, PDs, ELGDs, loadings, scaled first-order GA).

    Args:
        portfolio: Actuarial portfolio
        ga1st: First-order analytic GA
        meta: Encoding layout (default actuarial layout for 100 obligors)

    Returns:
        np.ndarray: Features of width 4 max_obligors + 1
    """
    return _encode(portfolio, ga1st, meta or EncodingMeta.for_kind(ACTUARIAL))


def encode_mtm(portfolio: Portfolio, ga1st: float, meta: EncodingMeta) -> np.ndarray:
    """
    Feature vector (shares, ELGDs, correlations, coupons, grade / S,
    scaled maturities, scaled first-order GA).

    Args:
        portfolio: MtM portfolio
        ga1st: First-order analytic GA
        meta: Encoding layout carrying the number of grades

    Returns:
        np.ndarray: Features of width 6 max_obligors + 1
    """
    return _encode(portfolio, ga1st, meta)


def encode(portfolio: Portfolio, ga1st: float, meta: EncodingMeta) -> np.ndarray:
    """Encode a portfolio of either kind."""
    return _encode(portfolio, ga1st, meta)


def _decode(features: np.ndarray, meta: EncodingMeta) -> Tuple[pd.DataFrame, float]:
    features = np.asarray(features, dtype=float)
    if features.shape != (meta.width,):
        raise WidthMismatchError(f"Feature vector of shape {features.shape}, layout expects ({meta.width},)")
    blocks = features[:-1].reshape(len(meta.blocks), meta.max_obligors)
    count = int(np.count_nonzero(blocks[0] > 0.0))
    frame = pd.DataFrame({name: blocks[i, :count] for i, name in enumerate(meta.blocks)})
    return frame, float(features[-1] / meta.ga_feature_scale)


def decode_actuarial(features: np.ndarray, meta: Optional[EncodingMeta] = None) -> Tuple[pd.DataFrame, float]:
    """
    Recover the sorted obligor fields and the first-order GA.

    Returns:
        Tuple: (DataFrame with columns share, pd, elgd, omega; first-order GA)
    """
    return _decode(features, meta or EncodingMeta.for_kind(ACTUARIAL))


def decode_mtm(features: np.ndarray, meta: EncodingMeta) -> Tuple[pd.DataFrame, float]:
    """
    Recover the sorted obligor fields and the first-order GA.

    Grades come back as integer indices and maturities in years.

    Returns:
        Tuple: (DataFrame with columns share, elgd, rho, coupon, rating, maturity; first-order GA)
    """
    frame, ga1st = _decode(features, meta)
    frame['grade'] = np.rint(frame['grade'] * meta.n_states).astype(int)
    frame['maturity'] = frame['maturity'] / meta.block_scales.get('maturity', 1.0)
    return frame.rename(columns={'grade': 'rating'}), ga1st
