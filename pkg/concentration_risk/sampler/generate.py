"""
Synthetic portfolio generation.
"""
import logging

import numpy as np

from concentration_risk.portfolio.io import round_to_grid
from concentration_risk.portfolio.models import ACTUARIAL, MTM, ActuarialObligor, MtmObligor, Portfolio
from concentration_risk.portfolio.transitions import TransitionMatrix
from concentration_risk.sampler.config import SamplerConfig
from concentration_risk.stochastics.streams import RandomSource, as_generator

# smallest exposure kept positive
MIN_EXPOSURE = 1e-300

logger = logging.getLogger(__name__)


def _obligor_id(index: int) -> str:
    return f"O{index + 1:03d}"


def _common_draws(cfg: SamplerConfig, generator: np.random.Generator):
    """Obligor count, exponential exposures, PD indices and the portfolio ELGD."""
    count = int(generator.integers(cfg.n_min, cfg.n_max + 1))
    theta = float(generator.uniform(*cfg.ead_theta_range))
    exposures = np.maximum(generator.exponential(1.0 / theta, size=count), MIN_EXPOSURE)
    pd_index = generator.choice(len(cfg.pd_support), size=count, p=cfg.pd_weights)
    elgd = float(cfg.elgd_choices[int(generator.integers(len(cfg.elgd_choices)))])
    return count, theta, exposures, pd_index, elgd


def sample_actuarial_portfolio(cfg: SamplerConfig, stream: RandomSource) -> Portfolio:
    """
    Draw one actuarial training portfolio.

    One exponential rate theta ~ U(ead_theta_range) and one ELGD are drawn
    per portfolio; PDs come from the discrete support and loadings from
    omega_range.

    Args:
        cfg: Sampler configuration
        stream: Random stream or generator

    Returns:
        Portfolio: Sampled portfolio, theta and ELGD recorded in metadata
    """
    generator = as_generator(stream)
    count, theta, exposures, pd_index, elgd = _common_draws(cfg, generator)
    omegas = generator.uniform(*cfg.omega_range, size=count)
    pds = np.asarray(cfg.pd_support)[pd_index]
    obligors = tuple(
        ActuarialObligor(_obligor_id(i), float(exposures[i]), float(pds[i]), elgd, float(omegas[i]))
        for i in range(count)
    )
    return Portfolio(obligors, cfg.nu, ACTUARIAL, metadata={'theta': theta, 'elgd': elgd},
                     max_obligors=cfg.max_obligors)


def grade_map(cfg: SamplerConfig, matrix: TransitionMatrix) -> np.ndarray:
    """Grade index nearest in default probability to every PD support point."""
    return np.array([matrix.nearest_grade(pd) for pd in cfg.pd_support], dtype=int)


def sample_mtm_portfolio(cfg: SamplerConfig, matrix: TransitionMatrix, stream: RandomSource) -> Portfolio:
    """
    Draw one MtM training portfolio.

    Ratings follow the PD support weights mapped to the nearest grade;
    correlations, coupons and maturities are uniform and maturities are
    rounded to the accrual grid.

    Args:
        cfg: Sampler configuration
        matrix: Transition matrix providing the grades
        stream: Random stream or generator

    Returns:
        Portfolio: Sampled portfolio
    """
    generator = as_generator(stream)
    count, theta, exposures, pd_index, elgd = _common_draws(cfg, generator)
    ratings = grade_map(cfg, matrix)[pd_index]
    rhos = generator.uniform(*cfg.rho_range, size=count)
    coupons = generator.uniform(*cfg.coupon_range, size=count)
    maturities = generator.uniform(*cfg.maturity_range, size=count)
    lower, upper = cfg.maturity_range
    obligors = []
    for i in range(count):
        maturity = min(max(round_to_grid(float(maturities[i]), cfg.accrual), lower), upper)
        obligors.append(MtmObligor(_obligor_id(i), float(exposures[i]), int(ratings[i]), elgd, float(rhos[i]),
                                   float(coupons[i]), maturity))
    return Portfolio(tuple(obligors), cfg.nu, MTM, metadata={'theta': theta, 'elgd': elgd},
                     grade_labels=matrix.labels, max_obligors=cfg.max_obligors)
