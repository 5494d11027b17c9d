"""
Running value-at-risk estimates with and without importance sampling.
"""
import logging
import os
from typing import Optional

import pandas as pd

from concentration_risk.engines.context import EngineContext
from concentration_risk.errors import InvalidParameterError
from concentration_risk.portfolio.models import ACTUARIAL, Portfolio
from concentration_risk.stochastics.quantiles import weighted_quantile

TRACE_BLOCK = 1000
TRACE_COLUMNS = ('k', 'plain_estimate', 'is_estimate')

logger = logging.getLogger(__name__)


def convergence_trace(portfolio: Portfolio, engines: EngineContext, k_max: int, block: int = TRACE_BLOCK,
                      paths_dir: Optional[str] = None) -> pd.DataFrame:
    """
    Quantile estimates on growing path prefixes.

    One plain and one importance-sampled run of k_max paths each; row j
    holds both estimates on their first (j + 1) * block paths.

    Args:
        portfolio: Portfolio of either kind
        engines: Model parameters
        k_max: Total number of paths per method
        block: Prefix increment
        paths_dir: If given, per-path ``loss,weight`` CSVs are written there

    Returns:
        pd.DataFrame: Columns k, plain_estimate, is_estimate with k_max // block rows
    """
    if block < 1 or k_max < block:
        raise InvalidParameterError(f"Need k_max >= block >= 1, got k_max={k_max}, block={block}")
    context = engines.with_sims(k_max)
    q = context.q(portfolio.model_kind)
    rule = (context.crplus if portfolio.model_kind == ACTUARIAL else context.mtm).quantile_rule
    _, plain = context.var(portfolio, 'plain')
    _, tilted = context.var(portfolio, 'is')

    rows = []
    for k in range(block, k_max + 1, block):
        rows.append((
            k,
            weighted_quantile(plain.losses[:k], q),
            weighted_quantile(tilted.losses[:k], q, tilted.log_weights[:k], rule),
        ))
    trace = pd.DataFrame(rows, columns=list(TRACE_COLUMNS))

    if paths_dir:
        os.makedirs(paths_dir, exist_ok=True)
        plain.to_csv(os.path.join(paths_dir, 'plain_paths.csv'))
        tilted.to_csv(os.path.join(paths_dir, 'is_paths.csv'))
        logger.info(f"Wrote per-path losses to {paths_dir}")
    logger.info(f"Convergence trace with {len(rows)} blocks of {block} paths")
    return trace
