"""
Risk-free yield curves: flat and Nelson-Siegel-Svensson.
"""
import json
import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional, Union

import numpy as np

from concentration_risk.errors import InvalidParameterError, SchemaViolationError
from concentration_risk.validation.json_schema import JsonSchemaValidator

FLAT = 'flat'
NSS = 'nelson-siegel-svensson'

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


def _loading(t: np.ndarray, tau: float) -> np.ndarray:
    """(1 - e^(-t/tau)) / (t/tau), equal to 1 at t = 0."""
    x = t / tau
    with np.errstate(invalid='ignore', divide='ignore'):
        value = -np.expm1(-x) / x
    return np.where(x == 0.0, 1.0, value)


@dataclass(frozen=True)
class YieldCurve:
    """
    Continuously compounded zero curve in decimal units.

    Discount factors are d(t) = exp(-y(t) t).
    """

    kind: str
    rate: float = 0.0
    beta0: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0
    beta3: float = 0.0
    tau1: float = 1.0
    tau2: float = 1.0
    date: Optional[str] = None

    def __post_init__(self):
        if self.kind not in (FLAT, NSS):
            raise InvalidParameterError(f"Unknown curve kind '{self.kind}'")
        if self.kind == NSS and not (self.tau1 > 0.0 and self.tau2 > 0.0):
            raise InvalidParameterError(f"NSS decay parameters must be positive, got {self.tau1}, {self.tau2}")

    @classmethod
    def flat(cls, rate: float) -> 'YieldCurve':
        return cls(kind=FLAT, rate=float(rate))

    @classmethod
    def nelson_siegel_svensson(cls, beta0: float, beta1: float, beta2: float, beta3: float, tau1: float,
                               tau2: float, units: str = 'percent', date: Optional[str] = None) -> 'YieldCurve':
        """
        Build an NSS curve.

        Args:
            beta0, beta1, beta2, beta3: Level, slope and curvature parameters
            tau1, tau2: Decay parameters in years
            units: 'percent' (as published by the Federal Reserve) or 'decimal'
            date: Observation date, informational

        Returns:
            YieldCurve: NSS curve in decimal units
        """
        if units not in ('percent', 'decimal'):
            raise InvalidParameterError(f"Unknown rate units '{units}'")
        factor = 0.01 if units == 'percent' else 1.0
        return cls(kind=NSS, beta0=beta0 * factor, beta1=beta1 * factor, beta2=beta2 * factor,
                   beta3=beta3 * factor, tau1=float(tau1), tau2=float(tau2), date=date)

    def zero_rate(self, t: ArrayLike) -> ArrayLike:
        """
        Zero rate y(t).

        Args:
            t: Maturity in years

        Returns:
            Zero rate(s) in decimal units
        """
        t = np.asarray(t, dtype=float)
        if self.kind == FLAT:
            value = np.full(t.shape, self.rate)
        else:
            first = _loading(t, self.tau1)
            second = _loading(t, self.tau2)
            value = (self.beta0 + self.beta1 * first
                     + self.beta2 * (first - np.exp(-t / self.tau1))
                     + self.beta3 * (second - np.exp(-t / self.tau2)))
        return float(value) if value.ndim == 0 else value

    def discount(self, t: ArrayLike) -> ArrayLike:
        """Discount factor d(t) = exp(-y(t) t)."""
        t_array = np.asarray(t, dtype=float)
        value = np.exp(-np.asarray(self.zero_rate(t_array)) * t_array)
        return float(value) if value.ndim == 0 else value

    def forward_discount(self, start: ArrayLike, end: ArrayLike) -> ArrayLike:
        """Value at ``start`` of one unit paid at ``end``: d(end) / d(start)."""
        value = np.asarray(self.discount(end)) / np.asarray(self.discount(start))
        return float(value) if value.ndim == 0 else value

    def to_dict(self) -> Dict[str, Any]:
        """
        Convert curve to dictionary (decimal units).

        Returns:
            Dict: Curve parameters
        """
        if self.kind == FLAT:
            return {'kind': FLAT, 'rate': self.rate}
        data = {k: v for k, v in asdict(self).items() if k != 'rate' and v is not None}
        data['units'] = 'decimal'
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'YieldCurve':
        """
        Create a curve from its JSON description.

        Args:
            data: Dictionary matching the yield curve schema

        Returns:
            YieldCurve: Curve

        Raises:
            SchemaViolationError: If the description is invalid
        """
        JsonSchemaValidator().require(data, 'yield_curve', what='yield curve')
        if data['kind'] == FLAT:
            return cls.flat(data['rate'])
        return cls.nelson_siegel_svensson(data['beta0'], data['beta1'], data['beta2'], data['beta3'],
                                          data['tau1'], data['tau2'], units=data.get('units', 'percent'),
                                          date=data.get('date'))

    def __str__(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def load_yield_curve(path: str) -> YieldCurve:
    """
    Load a yield curve JSON file.

    Args:
        path: JSON file with ``kind`` and parameter fields

    Returns:
        YieldCurve: Curve
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except FileNotFoundError:
        logger.error(f"Yield curve file not found: {path}")
        raise SchemaViolationError(f"Yield curve file not found: {path}")
    except json.JSONDecodeError as e:
        logger.error(f"Invalid yield curve file: {path} - {str(e)}")
        raise SchemaViolationError(f"Invalid yield curve file {path}: {str(e)}")
    curve = YieldCurve.from_dict(data)
    logger.info(f"Loaded {curve.kind} yield curve from {path}")
    return curve


def save_yield_curve(curve: YieldCurve, path: str) -> None:
    """Write a curve as JSON in decimal units."""
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(curve.to_dict(), f, indent=2)
    logger.info(f"Saved {curve.kind} yield curve to {path}")
