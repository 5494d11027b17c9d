"""
Sampler configuration for synthetic training portfolios.
"""
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Tuple

import numpy as np

from concentration_risk.errors import InvalidParameterError

PD_SUPPORT = (0.0, 0.01, 0.0002, 0.0004, 0.0006, 0.0011, 0.0018, 0.004, 0.009, 0.0146, 0.0238, 0.0759, 0.5147)
PD_WEIGHTS = (0.00049, 0.02297, 0.00881, 0.02627, 0.06454, 0.05865, 0.06928, 0.03111, 0.11070, 0.07672,
              0.19922, 0.10282, 0.22834)
WEIGHT_TOLERANCE = 1e-9
# printed weights are rounded to five decimals
RENORMALIZE_LIMIT = 1e-3

logger = logging.getLogger(__name__)


def _interval(name: str, value) -> Tuple[float, float]:
    lower, upper = (float(v) for v in value)
    if not lower <= upper:
        raise InvalidParameterError(f"Interval {name} is not ordered: [{lower}, {upper}]")
    return lower, upper


@dataclass(frozen=True)
class SamplerConfig:
    """
    Distribution of synthetic portfolios.

    PD weights off one by more than 1e-9 are renormalized with a warning.
    """

    n_min: int = 10
    n_max: int = 100
    ead_theta_range: Tuple[float, float] = (4.0, 30.0)
    pd_support: Tuple[float, ...] = PD_SUPPORT
    pd_weights: Tuple[float, ...] = PD_WEIGHTS
    omega_range: Tuple[float, float] = (0.0, 1.0)
    rho_range: Tuple[float, float] = (0.15, 0.7)
    coupon_range: Tuple[float, float] = (0.0, 0.1)
    maturity_range: Tuple[float, float] = (1.0, 10.0)
    elgd_choices: Tuple[float, ...] = (0.45, 0.10)
    nu: float = 0.25
    accrual: float = 0.5
    max_obligors: int = field(default=100)

    def __post_init__(self):
        if not 1 <= self.n_min <= self.n_max:
            raise InvalidParameterError(f"Obligor count range [{self.n_min}, {self.n_max}] is invalid")
        if self.n_max > self.max_obligors:
            raise InvalidParameterError(f"n_max {self.n_max} exceeds the portfolio limit {self.max_obligors}")
        for name in ('ead_theta_range', 'omega_range', 'rho_range', 'coupon_range', 'maturity_range'):
            object.__setattr__(self, name, _interval(name, getattr(self, name)))
        if self.ead_theta_range[0] <= 0.0:
            raise InvalidParameterError(f"Exponential rates must be positive, got {self.ead_theta_range}")
        if not (0.0 < self.rho_range[0] and self.rho_range[1] < 1.0):
            raise InvalidParameterError(f"Asset correlations must lie in (0, 1), got {self.rho_range}")
        if self.maturity_range[1] < self.accrual:
            raise InvalidParameterError(f"Maturities {self.maturity_range} are shorter than one accrual period")
        if not self.elgd_choices or any(not 0.0 <= e <= 1.0 for e in self.elgd_choices):
            raise InvalidParameterError(f"ELGD choices must lie in [0, 1], got {self.elgd_choices}")

        support = tuple(float(p) for p in self.pd_support)
        weights = np.asarray(self.pd_weights, dtype=float)
        if len(support) != weights.size or weights.size == 0:
            raise InvalidParameterError(f"{len(support)} PD support points but {weights.size} weights")
        if np.any(weights < 0.0) or any(not 0.0 <= p <= 1.0 for p in support):
            raise InvalidParameterError("PD support and weights must be nonnegative probabilities")
        total = float(weights.sum())
        if abs(total - 1.0) > RENORMALIZE_LIMIT:
            raise InvalidParameterError(f"PD weights sum to {total}")
        if abs(total - 1.0) > WEIGHT_TOLERANCE:
            logger.warning(f"PD weights sum to {total:.6f}, renormalizing")
        object.__setattr__(self, 'pd_support', support)
        object.__setattr__(self, 'pd_weights', tuple(float(w) for w in weights / total))
        object.__setattr__(self, 'elgd_choices', tuple(float(e) for e in self.elgd_choices))

    @classmethod
    def from_settings(cls, settings: Dict[str, Any]) -> 'SamplerConfig':
        """
        Build a configuration from a validated settings tree.

        Args:
            settings: Output of load_settings

        Returns:
            SamplerConfig: Configuration
        """
        sampler = settings['sampler']
        return cls(n_min=sampler['n_min'], n_max=sampler['n_max'],
                   ead_theta_range=tuple(sampler['ead_theta_range']),
                   pd_support=tuple(sampler['pd_support']), pd_weights=tuple(sampler['pd_weights']),
                   omega_range=tuple(sampler['omega_range']), rho_range=tuple(sampler['rho_range']),
                   coupon_range=tuple(sampler['coupon_range']), maturity_range=tuple(sampler['maturity_range']),
                   elgd_choices=tuple(sampler['elgd_choices']), nu=settings['lgd']['nu'],
                   accrual=sampler['accrual'], max_obligors=settings['portfolio']['max_obligors'])

    def to_dict(self) -> Dict[str, Any]:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    def digest(self) -> str:
        """SHA-256 of the canonical JSON form."""
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode('utf-8')).hexdigest()
