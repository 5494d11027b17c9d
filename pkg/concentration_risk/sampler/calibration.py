"""
Real-portfolio preparation: IRB asset correlations and factor loadings
matched to IRB capital.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import pandas as pd

from concentration_risk.errors import InvalidParameterError, SchemaViolationError
from concentration_risk.portfolio.models import (ACTUARIAL, DEFAULT_MAX_OBLIGORS, MTM, ActuarialObligor, MtmObligor,
                                                 Portfolio)
from concentration_risk.portfolio.transitions import TransitionMatrix
from concentration_risk.stochastics.distributions import GammaFactorSpec
from concentration_risk.stochastics.special import gamma_quantile, normal_cdf, normal_quantile
from concentration_risk.validation.validators import Validators

REAL_PORTFOLIO_COLUMNS = ('obligor_id', 'exposure', 'rating', 'elgd')

logger = logging.getLogger(__name__)


def irb_asset_correlation(pd_value: float) -> float:
    """
    Basel IRB corporate asset correlation, between 12 % and 24 %.

    Args:
        pd_value: Default probability in (0, 1)

    Returns:
        float: 0.12 w + 0.24 (1 - w) with w = (1 - exp(-50 PD)) / (1 - exp(-50))
    """
    weight = -math.expm1(-50.0 * pd_value) / -math.expm1(-50.0)
    return 0.12 * weight + 0.24 * (1.0 - weight)


@dataclass(frozen=True)
class OmegaCalibration:
    """Calibrated factor loading with its unclamped value and flags."""

    omega: float
    unclamped: float
    clamped: bool = False
    zero_pd: bool = False


def irb_capital(pd_value: float, elgd: float, rho: float, q: float) -> float:
    """IRB unexpected-loss capital ELGD [Phi((Phi^-1(PD) + sqrt(rho) Phi^-1(q)) / sqrt(1 - rho)) - PD]."""
    if pd_value <= 0.0 or pd_value >= 1.0:
        return 0.0
    stressed = normal_cdf((normal_quantile(pd_value) + math.sqrt(rho) * normal_quantile(q)) / math.sqrt(1.0 - rho))
    return elgd * (float(stressed) - pd_value)


def calibrate_omega(pd_value: float, elgd: float, rho: float, xi: float, q: float) -> OmegaCalibration:
    """
    Factor loading whose CreditRisk+ capital ELGD PD omega (x_q - 1) equals
    the IRB capital, clamped to [0, 1].

    Args:
        pd_value: Default probability
        elgd: Expected LGD
        rho: IRB asset correlation
        xi: Gamma precision
        q: Confidence level

    Returns:
        OmegaCalibration: Loading, zero with ``zero_pd`` when PD or ELGD vanish
    """
    if not 0.0 < rho < 1.0:
        raise InvalidParameterError(f"Asset correlation must lie in (0, 1), got {rho}")
    if pd_value <= 0.0 or elgd <= 0.0:
        return OmegaCalibration(omega=0.0, unclamped=0.0, zero_pd=True)
    x_q = gamma_quantile(GammaFactorSpec(xi), q)
    unclamped = irb_capital(pd_value, elgd, rho, q) / (elgd * pd_value * (x_q - 1.0))
    omega = min(max(unclamped, 0.0), 1.0)
    return OmegaCalibration(omega=omega, unclamped=unclamped, clamped=omega != unclamped)


def prepare_real_portfolio(frame: pd.DataFrame, matrix: TransitionMatrix, coupon: float = 0.01,
                           maturity: float = 1.0, xi: float = 0.25, q: float = 0.999, lgd_nu: float = 0.25,
                           max_obligors: int = DEFAULT_MAX_OBLIGORS) -> Tuple[Portfolio, Portfolio]:
    """
    Build the actuarial and the MtM view of one rated exposure list.

    PD is the one-year default probability of the rating, rho the IRB
    correlation and omega the IRB-matched loading. Every bond pays
    ``coupon`` and matures after ``maturity`` years.

    Args:
        frame: Columns obligor_id, exposure, rating, elgd
        matrix: Transition matrix resolving ratings
        coupon: Annual coupon rate
        maturity: Bond maturity in years
        xi: Gamma precision
        q: Confidence level
        lgd_nu: LGD volatility multiplier
        max_obligors: Maximum number of obligors

    Returns:
        Tuple: (actuarial portfolio, MtM portfolio)
    """
    check = Validators().validate_columns(frame, REAL_PORTFOLIO_COLUMNS)
    if not check['valid']:
        raise SchemaViolationError(check['message'], details={'missing': check['missing']})

    actuarial, mtm, clamped, zero = [], [], [], []
    default_probabilities = matrix.default_probabilities
    for row in frame.itertuples(index=False):
        obligor_id = str(row.obligor_id)
        grade = _grade(row.rating, matrix, obligor_id)
        pd_value = float(default_probabilities[grade])
        rho = irb_asset_correlation(pd_value)
        calibration = calibrate_omega(pd_value, float(row.elgd), rho, xi, q)
        if calibration.clamped:
            clamped.append(obligor_id)
        if calibration.zero_pd:
            zero.append(obligor_id)
        actuarial.append(ActuarialObligor(obligor_id, float(row.exposure), pd_value, float(row.elgd),
                                          calibration.omega))
        mtm.append(MtmObligor(obligor_id, float(row.exposure), grade, float(row.elgd), rho, coupon, maturity))

    if clamped:
        logger.warning(f"Factor loadings clamped to [0, 1] for {len(clamped)} obligors")
    metadata = {'omega_clamped': clamped, 'omega_zero_pd': zero, 'real_portfolio': True}
    return (Portfolio(tuple(actuarial), lgd_nu, ACTUARIAL, metadata=metadata, max_obligors=max_obligors),
            Portfolio(tuple(mtm), lgd_nu, MTM, metadata=dict(metadata), grade_labels=matrix.labels,
                      max_obligors=max_obligors))


def _grade(rating, matrix: TransitionMatrix, obligor_id: Optional[str]) -> int:
    text = str(rating).strip()
    if text in matrix.labels:
        grade = matrix.index_of(text)
    elif text.lstrip('-').isdigit():
        grade = int(text)
    else:
        raise SchemaViolationError(f"Obligor {obligor_id}: unknown rating '{text}'")
    if not 1 <= grade <= matrix.n_states:
        raise SchemaViolationError(f"Obligor {obligor_id}: rating '{text}' is not a non-default grade")
    return grade

