"""
Sensitivity of the GA to obligor deletions, one-notch downgrades and
exposure-share increases.
"""
import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from concentration_risk.engines.context import EngineContext
from concentration_risk.errors import InvalidParameterError, NumericalError
from concentration_risk.neural.inference import predict_ga
from concentration_risk.neural.mlp import MlpModel
from concentration_risk.portfolio.models import ACTUARIAL, Portfolio

WEIGHT_BUMP = 0.01
NOT_APPLICABLE = 'n/a'

logger = logging.getLogger(__name__)


@dataclass
class SensitivityReport:
    """Base GA and the three sensitivity tables."""

    base: Dict[str, float]
    deletions: pd.DataFrame
    downgrades: pd.DataFrame
    weight_bumps: pd.DataFrame
    parameters: Dict[str, Any] = field(default_factory=dict)

    def frames(self) -> Dict[str, pd.DataFrame]:
        return {
            'base': pd.DataFrame([self.base]),
            'deletions': self.deletions,
            'downgrades': self.downgrades,
            'weight_bumps': self.weight_bumps,
        }


class _Evaluator:
    """GA of a portfolio by every requested method."""

    def __init__(self, engines: EngineContext, model: Optional[MlpModel], include_exact: bool):
        self.engines = engines
        self.model = model
        self.include_exact = include_exact
        self.logger = logging.getLogger(__name__)
        self.methods = ['analytic'] + (['neural'] if model is not None else []) + \
            (['exact'] if include_exact else [])

    def __call__(self, portfolio: Portfolio) -> Dict[str, float]:
        values = {}
        for method in self.methods:
            try:
                if method == 'analytic':
                    values[method] = self.engines.ga_analytic(portfolio)
                elif method == 'neural':
                    values[method] = predict_ga(self.model, portfolio, self.engines)
                else:
                    values[method] = self.engines.ga_exact(portfolio).exact
            except NumericalError as e:
                self.logger.warning(f"{method} GA failed for {portfolio.n_obligors} obligors: {e.message}")
                values[method] = float('nan')
        return values


def bump_weight(portfolio: Portfolio, index: int, bump: float = WEIGHT_BUMP) -> Portfolio:
    """
    Raise one exposure share by ``bump`` and renormalize all shares to one.

    Exposures of the returned portfolio are the renormalized shares.
    """
    if not 0 <= index < portfolio.n_obligors:
        raise InvalidParameterError(f"Obligor index {index} outside 0..{portfolio.n_obligors - 1}")
    shares = np.array(portfolio.shares)
    shares[index] += bump
    shares /= shares.sum()
    obligors = [replace(o, exposure=float(s)) for o, s in zip(portfolio.obligors, shares)]
    return portfolio.with_obligors(obligors)


def downgrade(portfolio: Portfolio, index: int, engines: EngineContext) -> Optional[Portfolio]:
    """
    Move one obligor a notch down the rating scale.

    MtM obligors lose one grade. Actuarial obligors take the one-year
    default probability of the grade below the one nearest to their PD.

    Returns:
        Portfolio, or None if the obligor already holds the worst non-default grade
    """
    obligor = portfolio.obligors[index]
    matrix = engines.matrix
    if portfolio.model_kind == ACTUARIAL:
        grade = matrix.nearest_grade(obligor.pd)
        if grade <= 1:
            return None
        changed = replace(obligor, pd=float(matrix.default_probabilities[grade - 1]))
    else:
        if obligor.rating <= 1:
            return None
        changed = replace(obligor, rating=obligor.rating - 1)
    obligors = list(portfolio.obligors)
    obligors[index] = changed
    return portfolio.with_obligors(obligors)


def _grade_label(portfolio: Portfolio, obligor, engines: EngineContext) -> str:
    if portfolio.model_kind == ACTUARIAL:
        return engines.matrix.labels[engines.matrix.nearest_grade(obligor.pd)]
    return engines.matrix.labels[obligor.rating]


def sensitivity_battery(portfolio: Portfolio, engines: EngineContext, model: Optional[MlpModel] = None,
                        include_exact: bool = False, bump: float = WEIGHT_BUMP) -> SensitivityReport:
    """
    Run the three sensitivity studies on one portfolio.

    Deletions drop obligors from the end of the input order down to a
    single obligor. Downgrades and weight bumps change one obligor at a
    time and report the GA change against the base portfolio.

    Args:
        portfolio: Portfolio of either kind
        engines: Model parameters
        model: Optional trained network of the portfolio's kind
        include_exact: Also run the Monte Carlo GA (slow)
        bump: Absolute share increase before renormalization

    Returns:
        SensitivityReport: Base GA and deletion, downgrade and weight-bump tables
    """
    evaluate = _Evaluator(engines, model, include_exact)
    base = evaluate(portfolio)
    logger.info(f"Sensitivity battery on {portfolio.n_obligors} obligors, methods {evaluate.methods}")

    deletions: List[Dict[str, Any]] = []
    for count in range(portfolio.n_obligors, 0, -1):
        subset = portfolio if count == portfolio.n_obligors else \
            portfolio.with_obligors(portfolio.obligors[:count])
        row = {'n_obligors': count}
        row.update({f"ga_{m}": v for m, v in evaluate(subset).items()})
        deletions.append(row)

    downgrades: List[Dict[str, Any]] = []
    bumps: List[Dict[str, Any]] = []
    for index, obligor in enumerate(portfolio.obligors):
        share = float(portfolio.shares[index])
        changed = downgrade(portfolio, index, engines)
        row = {
            'obligor_id': obligor.obligor_id,
            'share': share,
            'from_grade': _grade_label(portfolio, obligor, engines),
            'to_grade': NOT_APPLICABLE,
            'applicable': changed is not None,
        }
        values = evaluate(changed) if changed is not None else {}
        if changed is not None:
            row['to_grade'] = _grade_label(changed, changed.obligors[index], engines)
        for method in evaluate.methods:
            value = values.get(method, float('nan'))
            row[f"ga_{method}"] = value
            row[f"delta_{method}"] = value - base[method]
        downgrades.append(row)

        bumped = bump_weight(portfolio, index, bump)
        row = {'obligor_id': obligor.obligor_id, 'share': share, 'bumped_share': float(bumped.shares[index])}
        for method, value in evaluate(bumped).items():
            row[f"ga_{method}"] = value
            row[f"delta_{method}"] = value - base[method]
        bumps.append(row)

    return SensitivityReport(
        base={f"ga_{m}": v for m, v in base.items()},
        deletions=pd.DataFrame(deletions),
        downgrades=pd.DataFrame(downgrades),
        weight_bumps=pd.DataFrame(bumps),
        parameters={'bump': bump, 'methods': evaluate.methods, 'portfolio_sha256': portfolio.digest()},
    )
