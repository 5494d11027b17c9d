"""
Accuracy evaluation of the analytic and neural GA against Monte Carlo.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from concentration_risk.engines.context import EngineContext
from concentration_risk.errors import InvalidParameterError
from concentration_risk.neural.inference import predict_ga
from concentration_risk.neural.mlp import MlpModel
from concentration_risk.neural.training import label_seed
from concentration_risk.portfolio.models import Portfolio

SUMMARY_COLUMNS = ('n_portfolios', 'mean', 'std', 'min', 'p25', 'p50', 'p75', 'max')
SMALL_PORTFOLIO_LIMIT = 25
MC_SEED_OFFSET = 1000003

logger = logging.getLogger(__name__)


def summarize_errors(errors) -> Dict[str, float]:
    """
    Summary statistics of absolute errors.

    Args:
        errors: Error values (NaN entries are ignored)

    Returns:
        Dict: n_portfolios, mean, std, min, p25, p50, p75, max
    """
    values = pd.Series(np.asarray(errors, dtype=float)).dropna()
    if values.empty:
        return {'n_portfolios': 0, **{name: float('nan') for name in SUMMARY_COLUMNS[1:]}}
    return {
        'n_portfolios': int(values.size),
        'mean': float(values.mean()),
        'std': float(values.std()) if values.size > 1 else 0.0,
        'min': float(values.min()),
        'p25': float(values.quantile(0.25)),
        'p50': float(values.quantile(0.50)),
        'p75': float(values.quantile(0.75)),
        'max': float(values.max()),
    }


@dataclass
class EvaluationReport:
    """Per-portfolio GA values and error summaries."""

    per_portfolio: pd.DataFrame
    summary: pd.DataFrame
    percent_errors: pd.DataFrame
    parameters: Dict[str, Any] = field(default_factory=dict)

    def frames(self) -> Dict[str, pd.DataFrame]:
        return {
            'per_portfolio': self.per_portfolio,
            'summary': self.summary,
            'percent_errors': self.percent_errors,
        }


def _summary_rows(frame: pd.DataFrame, methods: Sequence[str], small_limit: int,
                  prefix: str = 'abs_err') -> List[Dict[str, Any]]:
    slices = {'all': frame, f"n<{small_limit}": frame[frame['n_obligors'] < small_limit]}
    rows = []
    for slice_name, part in slices.items():
        for method in methods:
            row = {'slice': slice_name, 'method': method}
            row.update(summarize_errors(part[f"{prefix}_{method}"]))
            rows.append(row)
    return rows


def evaluate_methods(test_portfolios: Sequence[Portfolio], engines: EngineContext,
                     model: Optional[MlpModel] = None, mc_seed_offset: int = MC_SEED_OFFSET,
                     small_limit: int = SMALL_PORTFOLIO_LIMIT, progress: bool = False) -> EvaluationReport:
    """
    Compare first-order and neural GAs with the Monte Carlo GA.

    The Monte Carlo seed of portfolio i is derived from (seed, offset, i)
    with a nonzero offset, which keeps it apart from the training labels.

    Args:
        test_portfolios: Portfolios of one model kind
        engines: Model parameters (Monte Carlo budget included)
        model: Trained network; without it only the analytic GA is evaluated
        mc_seed_offset: Seed offset of the Monte Carlo labels
        small_limit: Obligor count below which a portfolio enters the small slice
        progress: Show a progress bar

    Returns:
        EvaluationReport: Per-portfolio table, absolute-error summary and percentage-error summary
    """
    if not test_portfolios:
        raise InvalidParameterError("No test portfolios to evaluate")
    if mc_seed_offset == 0:
        raise InvalidParameterError("Monte Carlo seed offset 0 collides with the training labels")
    kinds = {p.model_kind for p in test_portfolios}
    if len(kinds) != 1:
        raise InvalidParameterError(f"Test portfolios mix model kinds {sorted(kinds)}")
    methods = ['analytic'] + (['neural'] if model is not None else [])
    seed = engines.crplus.seed

    rows = []
    for index, portfolio in enumerate(tqdm(test_portfolios, desc="Evaluating", disable=not progress)):
        digest = portfolio.digest()
        exact = engines.with_seed(label_seed(seed, index, mc_seed_offset)).ga_exact(portfolio).exact
        row = {
            'index': index,
            'n_obligors': portfolio.n_obligors,
            'portfolio_sha256': digest,
            'ga_exact': exact,
            'ga_analytic': engines.ga_analytic(portfolio),
        }
        if model is not None:
            row['ga_neural'] = predict_ga(model, portfolio, engines)
        if portfolio.digest() != digest:
            raise InvalidParameterError(f"Portfolio {index} changed during evaluation")
        rows.append(row)
        logger.debug(f"Portfolio {index}: {row}")

    frame = pd.DataFrame(rows)
    for method in ['exact'] + methods:
        frame[f"ga_{method}_percent"] = frame[f"ga_{method}"] * 100.0
    for method in methods:
        frame[f"abs_err_{method}"] = (frame[f"ga_{method}"] - frame['ga_exact']).abs()
        with np.errstate(divide='ignore', invalid='ignore'):
            frame[f"pct_err_{method}"] = 100.0 * frame[f"abs_err_{method}"] / frame['ga_exact'].abs()

    summary = pd.DataFrame(_summary_rows(frame, methods, small_limit),
                           columns=['slice', 'method'] + list(SUMMARY_COLUMNS))
    percent = pd.DataFrame(_summary_rows(frame.replace([np.inf, -np.inf], np.nan), methods, small_limit,
                                         prefix='pct_err'),
                           columns=['slice', 'method'] + list(SUMMARY_COLUMNS))
    logger.info(f"Evaluated {len(rows)} {kinds.pop()} portfolios with methods {methods}")
    return EvaluationReport(frame, summary, percent, parameters={
        'mc_seed_offset': mc_seed_offset,
        'small_limit': small_limit,
        'engines': engines.describe(),
    })
