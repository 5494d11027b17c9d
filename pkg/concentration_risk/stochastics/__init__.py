"""
Random streams, samplers, special functions and root finding.
"""
from concentration_risk.stochastics.distributions import (BetaLgdSpec, GammaFactorSpec, sample_beta_lgd,
                                                          sample_gamma, sample_lgd_matrix)
from concentration_risk.stochastics.quantiles import QUANTILE_RULES, effective_sample_size, weighted_quantile
from concentration_risk.stochastics.solvers import solve_monotone
from concentration_risk.stochastics.special import (gamma_cdf, gamma_quantile, normal_cdf, normal_pdf,
                                                    normal_quantile)
from concentration_risk.stochastics.streams import RandomStream, as_generator

__all__ = [
    'BetaLgdSpec', 'GammaFactorSpec', 'QUANTILE_RULES', 'RandomStream', 'as_generator',
    'effective_sample_size', 'gamma_cdf', 'gamma_quantile', 'normal_cdf', 'normal_pdf',
    'normal_quantile', 'sample_beta_lgd', 'sample_gamma', 'sample_lgd_matrix', 'solve_monotone',
    'weighted_quantile',
]
