"""
Obligor and portfolio data model.
"""
import hashlib
import io
import logging
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Dict, Iterable, Mapping, Optional, Tuple, Union

import numpy as np
import pandas as pd

from concentration_risk.errors import (EmptyPortfolioError, InvalidParameterError, KindMismatchError,
                                       TooManyObligorsError)

ACTUARIAL = 'actuarial'
MTM = 'mtm'
MODEL_KINDS = (ACTUARIAL, MTM)

DEFAULT_MAX_OBLIGORS = 100

ACTUARIAL_COLUMNS = ('obligor_id', 'exposure', 'pd', 'elgd', 'omega')
MTM_COLUMNS = ('obligor_id', 'exposure', 'rating', 'elgd', 'rho', 'coupon', 'maturity')

logger = logging.getLogger(__name__)


def _check(condition: bool, message: str) -> None:
    if not condition:
        raise InvalidParameterError(message)


@dataclass(frozen=True)
class ActuarialObligor:
    """Obligor of the actuarial (CreditRisk+) model."""

    obligor_id: str
    exposure: float
    pd: float
    elgd: float
    omega: float

    def __post_init__(self):
        _check(self.exposure > 0.0, f"Obligor {self.obligor_id}: exposure must be positive, got {self.exposure}")
        _check(0.0 <= self.pd <= 1.0, f"Obligor {self.obligor_id}: pd must lie in [0, 1], got {self.pd}")
        _check(0.0 <= self.elgd <= 1.0, f"Obligor {self.obligor_id}: elgd must lie in [0, 1], got {self.elgd}")
        _check(0.0 <= self.omega <= 1.0, f"Obligor {self.obligor_id}: omega must lie in [0, 1], got {self.omega}")


@dataclass(frozen=True)
class MtmObligor:
    """
    Obligor of the mark-to-market (CreditMetrics) model.

    ``rating`` is the grade index, 0 being default and larger meaning better.
    """

    obligor_id: str
    exposure: float
    rating: int
    elgd: float
    rho: float
    coupon: float
    maturity: float

    def __post_init__(self):
        _check(self.exposure > 0.0, f"Obligor {self.obligor_id}: exposure must be positive, got {self.exposure}")
        _check(int(self.rating) >= 1, f"Obligor {self.obligor_id}: rating must be a non-default grade, got {self.rating}")
        _check(0.0 <= self.elgd <= 1.0, f"Obligor {self.obligor_id}: elgd must lie in [0, 1], got {self.elgd}")
        _check(0.0 < self.rho < 1.0, f"Obligor {self.obligor_id}: rho must lie in (0, 1), got {self.rho}")
        _check(self.coupon >= 0.0, f"Obligor {self.obligor_id}: coupon must be nonnegative, got {self.coupon}")
        _check(self.maturity > 0.0, f"Obligor {self.obligor_id}: maturity must be positive, got {self.maturity}")


Obligor = Union[ActuarialObligor, MtmObligor]


@dataclass(frozen=True)
class Portfolio:
    """
    Immutable loan portfolio under one model kind.

    Equality compares obligors, the LGD volatility multiplier and the kind;
    metadata, grade labels and the size limit are carried along.
    """

    obligors: Tuple[Obligor, ...]
    lgd_nu: float
    model_kind: str
    metadata: Mapping[str, Any] = field(default_factory=dict, compare=False)
    grade_labels: Optional[Tuple[str, ...]] = field(default=None, compare=False)
    max_obligors: int = field(default=DEFAULT_MAX_OBLIGORS, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'obligors', tuple(self.obligors))
        if self.model_kind not in MODEL_KINDS:
            raise InvalidParameterError(f"Unknown model kind '{self.model_kind}', expected one of {MODEL_KINDS}")
        if not self.obligors:
            raise EmptyPortfolioError("Portfolio holds no obligors")
        if len(self.obligors) > self.max_obligors:
            raise TooManyObligorsError(
                f"Portfolio holds {len(self.obligors)} obligors, maximum is {self.max_obligors}")
        expected = ActuarialObligor if self.model_kind == ACTUARIAL else MtmObligor
        for obligor in self.obligors:
            if not isinstance(obligor, expected):
                raise KindMismatchError(
                    f"{self.model_kind} portfolio cannot hold {type(obligor).__name__} {obligor.obligor_id}")
        if not 0.0 <= self.lgd_nu < 1.0:
            raise InvalidParameterError(f"LGD volatility multiplier nu must lie in [0, 1), got {self.lgd_nu}")
        if self.model_kind == MTM and self.grade_labels is not None:
            worst = max(o.rating for o in self.obligors)
            if worst >= len(self.grade_labels):
                raise InvalidParameterError(f"Rating index {worst} outside {len(self.grade_labels)} grade labels")

    def __len__(self) -> int:
        return len(self.obligors)

    @property
    def n_obligors(self) -> int:
        return len(self.obligors)

    def _column(self, name: str) -> np.ndarray:
        values = np.array([getattr(o, name) for o in self.obligors])
        values.setflags(write=False)
        return values

    @cached_property
    def exposures(self) -> np.ndarray:
        return self._column('exposure').astype(float)

    @cached_property
    def shares(self) -> np.ndarray:
        shares = self.exposures / self.exposures.sum()
        shares.setflags(write=False)
        return shares

    @cached_property
    def elgds(self) -> np.ndarray:
        return self._column('elgd').astype(float)

    @cached_property
    def pds(self) -> np.ndarray:
        self.require_kind(ACTUARIAL)
        return self._column('pd').astype(float)

    @cached_property
    def omegas(self) -> np.ndarray:
        self.require_kind(ACTUARIAL)
        return self._column('omega').astype(float)

    @cached_property
    def ratings(self) -> np.ndarray:
        self.require_kind(MTM)
        return self._column('rating').astype(int)

    @cached_property
    def rhos(self) -> np.ndarray:
        self.require_kind(MTM)
        return self._column('rho').astype(float)

    @cached_property
    def coupons(self) -> np.ndarray:
        self.require_kind(MTM)
        return self._column('coupon').astype(float)

    @cached_property
    def maturities(self) -> np.ndarray:
        self.require_kind(MTM)
        return self._column('maturity').astype(float)

    def require_kind(self, model_kind: str) -> None:
        """
        Ensure the portfolio belongs to a model kind.

        Raises:
            KindMismatchError: If the kinds differ
        """
        if self.model_kind != model_kind:
            raise KindMismatchError(f"Expected a {model_kind} portfolio, got {self.model_kind}")

    def with_obligors(self, obligors: Iterable[Obligor], **metadata: Any) -> 'Portfolio':
        """
        Copy of the portfolio holding other obligors.

        Args:
            obligors: Replacement obligors
            **metadata: Metadata entries added to the copy

        Returns:
            Portfolio: New portfolio
        """
        merged = dict(self.metadata)
        merged.update(metadata)
        return replace(self, obligors=tuple(obligors), metadata=merged)

    def to_frame(self) -> pd.DataFrame:
        """
        Tabular view in the portfolio CSV layout.

        Returns:
            DataFrame: One row per obligor
        """
        columns = ACTUARIAL_COLUMNS if self.model_kind == ACTUARIAL else MTM_COLUMNS
        frame = pd.DataFrame([[getattr(o, c) for c in columns] for o in self.obligors], columns=list(columns))
        if self.model_kind == MTM and self.grade_labels is not None:
            frame['rating'] = [self.grade_labels[r] for r in frame['rating']]
        return frame

    def canonical_bytes(self) -> bytes:
        """CSV bytes identifying the portfolio content."""
        buffer = io.StringIO()
        self.to_frame().to_csv(buffer, index=False, float_format='%.17g')
        buffer.write(f"# lgd_nu={self.lgd_nu!r}\n")
        return buffer.getvalue().encode('utf-8')

    def digest(self) -> str:
        """SHA-256 of the canonical CSV bytes."""
        return hashlib.sha256(self.canonical_bytes()).hexdigest()

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert portfolio to dictionary.

        Returns:
            Dict: Portfolio as dictionary
        """
        return {
            'model_kind': self.model_kind,
            'lgd_nu': self.lgd_nu,
            'n_obligors': self.n_obligors,
            'digest': self.digest(),
            'metadata': dict(self.metadata),
        }


def exposure_shares(portfolio: Portfolio) -> np.ndarray:
    """
    Exposure shares a_n = A_n / sum A_i.

    Args:
        portfolio: Portfolio

    Returns:
        np.ndarray: Shares summing to one
    """
    return np.array(portfolio.shares)

