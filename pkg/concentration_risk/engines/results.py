"""
Result models for simulated losses and granularity adjustments.
"""
import json
import math
from dataclasses import dataclass
from typing import Any, Dict, Iterator, Optional, Sequence

import numpy as np
import pandas as pd

from concentration_risk.stochastics.quantiles import effective_sample_size

METHODS = ('exact', 'analytic', 'neural')


@dataclass(frozen=True)
class WeightedLossSample:
    """One simulated loss with its likelihood ratio."""

    loss: float
    weight: float


class LossSampleSet(Sequence[WeightedLossSample]):
    """
    Simulated losses in path order, backed by arrays.

    Plain Monte Carlo samples carry unit weights.
    """

    def __init__(self, losses: np.ndarray, log_weights: Optional[np.ndarray] = None,
                 diagnostics: Optional[Dict[str, Any]] = None):
        """
        Initialize the sample set.

        Args:
            losses: Simulated losses
            log_weights: Log likelihood ratios (None for unit weights)
            diagnostics: Simulation statistics, e.g. tilting parameters
        """
        self.losses = np.asarray(losses, dtype=float)
        self.log_weights = None if log_weights is None else np.asarray(log_weights, dtype=float)
        self.diagnostics = diagnostics or {}

    @property
    def weights(self) -> np.ndarray:
        if self.log_weights is None:
            return np.ones_like(self.losses)
        return np.exp(self.log_weights)

    @property
    def is_weighted(self) -> bool:
        return self.log_weights is not None

    def __len__(self) -> int:
        return self.losses.size

    def __getitem__(self, index):
        if isinstance(index, slice):
            log_weights = None if self.log_weights is None else self.log_weights[index]
            return LossSampleSet(self.losses[index], log_weights)
        weight = 1.0 if self.log_weights is None else math.exp(self.log_weights[index])
        return WeightedLossSample(float(self.losses[index]), weight)

    def __iter__(self) -> Iterator[WeightedLossSample]:
        weights = self.weights
        for loss, weight in zip(self.losses, weights):
            yield WeightedLossSample(float(loss), float(weight))

    def effective_sample_size(self) -> float:
        if self.log_weights is None:
            return float(len(self))
        return effective_sample_size(self.log_weights)

    def weighted_mean(self, values: Optional[np.ndarray] = None) -> float:
        """Mean of values (default: the losses) times weights."""
        values = self.losses if values is None else np.asarray(values, dtype=float)
        return float(np.mean(values * self.weights))

    def to_frame(self) -> pd.DataFrame:
        """Per-path table with columns loss, weight."""
        return pd.DataFrame({'loss': self.losses, 'weight': self.weights})

    def to_csv(self, path: str) -> None:
        """Write the per-path ``loss,weight`` CSV."""
        self.to_frame().to_csv(path, index=False)


class GaResult:
    """Granularity adjustment of one portfolio by up to three methods."""

    def __init__(
        self,
        model_kind: str,
        exact: Optional[float] = None,
        analytic: Optional[float] = None,
        neural: Optional[float] = None,
        diagnostics: Optional[Dict[str, Any]] = None
    ):
        """
        Initialize the result.

        Args:
            model_kind: 'actuarial' or 'mtm'
            exact: Monte Carlo GA with importance sampling
            analytic: First-order analytic GA
            neural: Neural network GA
            diagnostics: Method diagnostics
        """
        self.model_kind = model_kind
        self.exact = exact
        self.analytic = analytic
        self.neural = neural
        self.diagnostics = diagnostics or {}

    def value(self, method: str) -> Optional[float]:
        """
        GA of one method.

        Args:
            method: 'exact', 'analytic' or 'neural'

        Returns:
            float or None: GA if computed
        """
        if method not in METHODS:
            raise ValueError(f"Unknown GA method '{method}', expected one of {METHODS}")
        return getattr(self, method)

    def merge(self, other: 'GaResult') -> 'GaResult':
        """
        Combine two results of the same portfolio, values from other winning.

        Args:
            other: Result to merge in

        Returns:
            GaResult: Combined result
        """
        if other.model_kind != self.model_kind:
            raise ValueError(f"Cannot merge {other.model_kind} result into {self.model_kind} result")
        values = {m: other.value(m) if other.value(m) is not None else self.value(m) for m in METHODS}
        diagnostics = dict(self.diagnostics)
        diagnostics.update(other.diagnostics)
        return GaResult(self.model_kind, diagnostics=diagnostics, **values)

    def to_dict(self, percent: bool = False) -> Dict[str, Any]:
        """
        Convert result to dictionary.

        Args:
            percent: Report GA values in percent of total exposure

        Returns:
            Dict: Result as dictionary
        """
        factor = 100.0 if percent else 1.0
        result = {'model_kind': self.model_kind, 'units': 'percent' if percent else 'fraction'}
        for method in METHODS:
            value = self.value(method)
            if value is not None:
                result[method] = value * factor
        if self.diagnostics:
            result['diagnostics'] = self.diagnostics
        return result

    def __str__(self) -> str:
        return json.dumps(self.to_dict(), indent=2, default=float)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'GaResult':
        """
        Create a result from its dictionary form.

        Args:
            data: Output of to_dict

        Returns:
            GaResult: Result in fractions
        """
        factor = 0.01 if data.get('units') == 'percent' else 1.0
        values = {m: data[m] * factor for m in METHODS if data.get(m) is not None}
        return cls(data['model_kind'], diagnostics=data.get('diagnostics'), **values)
