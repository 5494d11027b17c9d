"""
Weighted empirical quantiles for plain and importance-sampled losses.
"""
import math
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from concentration_risk.errors import InvalidParameterError

QUANTILE_RULES = ('cumulative', 'tail', 'normalized')


def weighted_quantile(losses: np.ndarray, q: float, log_weights: Optional[np.ndarray] = None,
                      rule: str = 'cumulative') -> float:
    """
    Empirical q-quantile of losses carrying likelihood-ratio weights.

    Losses are sorted ascending and the weights accumulated in log space.
    Rules for the index i* of the returned sorted loss:

    - ``cumulative``: first i with sum_{j<=i} w_j >= q K
    - ``normalized``: first i with sum_{j<=i} w_j >= q sum_j w_j
    - ``tail``: first i with sum_{j>i} w_j <= (1 - q) K

    All three agree for unit weights. ``cumulative`` is the default. ``tail``
    reads the distribution function off the tail weights only and is less
    sensitive to the noise in the total weight.

    Args:
        losses: Simulated losses
        q: Confidence level in (0, 1)
        log_weights: Log likelihood ratios (None for plain Monte Carlo)
        rule: One of QUANTILE_RULES

    Returns:
        float: Quantile estimate
    """
    if not 0.0 < q < 1.0:
        raise InvalidParameterError(f"Quantile level must lie in (0, 1), got {q}")
    if rule not in QUANTILE_RULES:
        raise InvalidParameterError(f"Unknown quantile rule '{rule}', expected one of {QUANTILE_RULES}")
    losses = np.asarray(losses, dtype=float)
    count = losses.size
    if count == 0:
        raise InvalidParameterError("Cannot take the quantile of an empty sample")

    if log_weights is None:
        index = max(math.ceil(q * count - 1e-9) - 1, 0)
        return float(np.partition(losses, index)[index])

    order = np.argsort(losses, kind='stable')
    sorted_losses = losses[order]
    sorted_log_weights = np.asarray(log_weights, dtype=float)[order]

    if rule == 'tail':
        tail_inclusive = np.logaddexp.accumulate(sorted_log_weights[::-1])[::-1]
        tail_exclusive = np.append(tail_inclusive[1:], -np.inf)
        target = math.log((1.0 - q) * count)
        index = int(np.searchsorted(-tail_exclusive, -target, side='left'))
    else:
        cumulative = np.logaddexp.accumulate(sorted_log_weights)
        if rule == 'cumulative':
            target = math.log(q * count)
        else:
            target = math.log(q) + cumulative[-1]
        index = int(np.searchsorted(cumulative, target, side='left'))
    return float(sorted_losses[min(index, count - 1)])


def effective_sample_size(log_weights: np.ndarray) -> float:
    """
    Effective sample size (sum w)^2 / sum w^2 of a weighted sample.

    Args:
        log_weights: Log likelihood ratios

    Returns:
        float: Effective sample size
    """
    log_weights = np.asarray(log_weights, dtype=float)
    if log_weights.size == 0:
        return 0.0
    return float(math.exp(2.0 * logsumexp(log_weights) - logsumexp(2.0 * log_weights)))
