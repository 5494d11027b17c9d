"""
First-order granularity adjustment of the actuarial model.
"""
import logging
from dataclasses import dataclass

import numpy as np

from concentration_risk.errors import ZeroCapitalError
from concentration_risk.portfolio.models import ACTUARIAL, Portfolio
from concentration_risk.stochastics.distributions import GammaFactorSpec
from concentration_risk.stochastics.special import gamma_quantile

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IrbInputs:
    """
    Per-obligor reserve and capital terms of the first-order formula.

    Obligors with zero ELGD carry zero ``c`` and ``dispersion``.
    """

    shares: np.ndarray
    reserve: np.ndarray
    capital: np.ndarray
    delta: float
    vlgd2: np.ndarray
    c: np.ndarray
    dispersion: np.ndarray
    factor_quantile: float

    @property
    def total_capital(self) -> float:
        """K* = sum a_n K_n."""
        return float(np.dot(self.shares, self.capital))


def irb_inputs(portfolio: Portfolio, xi: float, q: float) -> IrbInputs:
    """
    Reserve R_n = ELGD PD, capital K_n = ELGD PD omega (x_q - 1) and the
    slope term delta = (x_q - 1)(xi + (1 - xi) / x_q).

    Args:
        portfolio: Actuarial portfolio
        xi: Gamma precision
        q: Confidence level

    Returns:
        IrbInputs: Formula inputs
    """
    portfolio.require_kind(ACTUARIAL)
    x_q = gamma_quantile(GammaFactorSpec(xi), q)
    elgd, pd = portfolio.elgds, portfolio.pds
    reserve = elgd * pd
    capital = reserve * portfolio.omegas * (x_q - 1.0)
    delta = (x_q - 1.0) * (xi + (1.0 - xi) / x_q)
    vlgd2 = portfolio.lgd_nu * elgd * (1.0 - elgd)
    positive = elgd > 0.0
    safe = np.where(positive, elgd, 1.0)
    c = np.where(positive, (vlgd2 + elgd ** 2) / safe, 0.0)
    dispersion = np.where(positive, vlgd2 / safe ** 2, 0.0)
    return IrbInputs(shares=np.array(portfolio.shares), reserve=reserve, capital=capital, delta=delta,
                     vlgd2=vlgd2, c=c, dispersion=dispersion, factor_quantile=x_q)


def ga_first_order_actuarial(portfolio: Portfolio, xi: float, q: float) -> float:
    """
    First-order granularity adjustment of a one-factor CreditRisk+ portfolio.

    GA = 1/(2 K*) sum a_n^2 [delta (C_n (K_n + R_n) + (K_n + R_n)^2 VLGD^2 / ELGD^2)
                             - K_n (C_n + 2 (K_n + R_n) VLGD^2 / ELGD^2)]

    Args:
        portfolio: Actuarial portfolio
        xi: Gamma precision
        q: Confidence level

    Returns:
        float: Granularity adjustment

    Raises:
        ZeroCapitalError: If the aggregate capital K* vanishes
    """
    inputs = irb_inputs(portfolio, xi, q)
    k_star = inputs.total_capital
    if not abs(k_star) > 0.0:
        logger.error("Aggregate capital is zero, first-order GA undefined")
        raise ZeroCapitalError("Aggregate unexpected-loss capital K* is zero", details={'k_star': k_star})

    loss = inputs.capital + inputs.reserve
    terms = (inputs.delta * (inputs.c * loss + loss ** 2 * inputs.dispersion)
             - inputs.capital * (inputs.c + 2.0 * loss * inputs.dispersion))
    ga = float(np.sum(inputs.shares ** 2 * terms) / (2.0 * k_star))
    logger.debug(f"First-order actuarial GA {ga} (K*={k_star}, delta={inputs.delta})")
    return ga
