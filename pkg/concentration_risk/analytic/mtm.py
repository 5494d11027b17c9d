"""
First-order granularity adjustment of the mark-to-market model.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np

from concentration_risk.engines.valuation import (MtmMarketParams, PortfolioValuation, ThresholdTable,
                                                  migration_probabilities, value_portfolio)
from concentration_risk.errors import DegenerateDenominatorError, InvalidParameterError
from concentration_risk.portfolio.models import MTM, Portfolio
from concentration_risk.stochastics.special import normal_pdf, normal_quantile

DENOMINATOR_TOLERANCE = 1e-12
ZERO_VARIANCE = 1e-14

logger = logging.getLogger(__name__)


def _derivatives(bounds: np.ndarray, rho: np.ndarray, x: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    rho = np.asarray(rho, dtype=float)[..., None]
    k = np.sqrt(rho / (1.0 - rho))
    z = (bounds - x * np.sqrt(rho)) / np.sqrt(1.0 - rho)
    finite = np.isfinite(z)
    z = np.where(finite, z, 0.0)
    density = np.where(finite, normal_pdf(z), 0.0)

    first = -k * density
    second = -k ** 2 * z * density
    third = k ** 3 * (1.0 - z ** 2) * density
    # state s spans (bounds[s], bounds[s+1]]
    return (first[..., 1:] - first[..., :-1],
            second[..., 1:] - second[..., :-1],
            third[..., 1:] - third[..., :-1])


def pi_derivatives(grade: int, state: int, rho: float, x: float,
                   table: ThresholdTable) -> Tuple[float, float, float]:
    """
    First three derivatives in x of the conditional migration probability.

    Args:
        grade: Current grade index
        state: Horizon state index
        rho: Asset correlation in (0, 1)
        x: Factor value
        table: Threshold table

    Returns:
        Tuple: (pi', pi'', pi''')
    """
    if not 0.0 < rho < 1.0:
        raise InvalidParameterError(f"Asset correlation must lie in (0, 1), got {rho}")
    first, second, third = _derivatives(table.bounds[grade], rho, x)
    return float(first[state]), float(second[state]), float(third[state])


def obligor_moments(valuations: PortfolioValuation, x: float):
    """
    Conditional return moments of every obligor at x.

    Returns:
        Tuple: (mu, mu', mu'', sigma^2, d sigma^2 / dx), each of shape (N,)
    """
    pi = migration_probabilities(valuations.bounds, x, valuations.rhos)
    d1, d2, _ = _derivatives(valuations.bounds, valuations.rhos, x)
    lambdas = valuations.lambdas

    spread = np.zeros_like(lambdas)
    spread[:, 0] = valuations.forward_ratio ** 2 * valuations.lgd_nu * valuations.elgds * (1.0 - valuations.elgds)
    second_moment = spread + lambdas ** 2

    mean = (lambdas * pi).sum(axis=1)
    mean_1 = (lambdas * d1).sum(axis=1)
    mean_2 = (lambdas * d2).sum(axis=1)
    variance = (second_moment * pi).sum(axis=1) - mean ** 2
    variance_1 = (second_moment * d1).sum(axis=1) - 2.0 * mean * mean_1
    return mean, mean_1, mean_2, variance, variance_1


def ga_first_order_mtm(portfolio: Portfolio, mkt: MtmMarketParams,
                       valuations: Optional[PortfolioValuation] = None) -> float:
    """
    First-order granularity adjustment of a CreditMetrics MtM portfolio.

    With A = sum a_n^2 sigma_n^2, A' its derivative, B = sum a_n mu_n' and
    B' = sum a_n mu_n'', all at x* = Phi^-1(1 - q):

        GA = d(T) / 2 (-x* A / B + A' / B - A B' / B^2)

    Args:
        portfolio: MtM portfolio
        mkt: Market parameters
        valuations: Valuation tables (computed if None)

    Returns:
        float: Granularity adjustment

    Raises:
        DegenerateDenominatorError: If sum a_n mu_n'(x*) vanishes
    """
    portfolio.require_kind(MTM)
    valuations = valuations if valuations is not None else value_portfolio(portfolio, mkt)
    x = normal_quantile(1.0 - mkt.q)
    _, mean_1, mean_2, variance, variance_1 = obligor_moments(valuations, x)
    shares = valuations.shares

    dispersion = float(np.dot(shares ** 2, variance))
    dispersion_1 = float(np.dot(shares ** 2, variance_1))
    if abs(dispersion) < ZERO_VARIANCE and abs(dispersion_1) < ZERO_VARIANCE:
        return 0.0
    slope = float(np.dot(shares, mean_1))
    curvature = float(np.dot(shares, mean_2))
    if abs(slope) < DENOMINATOR_TOLERANCE:
        logger.error(f"Conditional mean slope {slope} too small at x={x}")
        raise DegenerateDenominatorError(f"Sum of a_n mu_n'(x) is {slope} at x={x}", details={'slope': slope})

    ga = 0.5 * mkt.discount_horizon * (-x * dispersion / slope + dispersion_1 / slope
                                       - dispersion * curvature / slope ** 2)
    if not math.isfinite(ga):
        raise DegenerateDenominatorError(f"Non-finite first-order MtM GA at x={x}")
    logger.debug(f"First-order MtM GA {ga} (A={dispersion}, B={slope})")
    return ga
