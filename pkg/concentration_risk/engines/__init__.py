"""
Simulation engines of the actuarial and mark-to-market models.
"""
from concentration_risk.engines.cmetrics import (ga_exact_mtm, is_var_mtm, mu_conditional, plain_var_mtm,
                                                 simulate_loss_plain_mtm, solve_factor_shift, solve_tilt_t)
from concentration_risk.engines.crplus import (CrPlusParams, TiltingSolution, conditional_expected_loss,
                                               conditional_pd, ga_exact_actuarial, is_var, plain_var,
                                               simulate_loss_plain, solve_tilting)
from concentration_risk.engines.results import GaResult, LossSampleSet, WeightedLossSample
from concentration_risk.engines.valuation import (BondValuation, MtmMarketParams, PortfolioValuation,
                                                  ThresholdTable, conditional_migration, price_bond_t0,
                                                  price_bond_tT, risk_neutral_default_curve, thresholds,
                                                  value_bond, value_portfolio)

__all__ = [
    'BondValuation', 'CrPlusParams', 'GaResult', 'LossSampleSet', 'MtmMarketParams',
    'PortfolioValuation', 'ThresholdTable', 'TiltingSolution', 'WeightedLossSample', 'conditional_expected_loss',
    'conditional_migration', 'conditional_pd', 'ga_exact_actuarial', 'ga_exact_mtm', 'is_var', 'is_var_mtm',
    'mu_conditional', 'plain_var', 'plain_var_mtm', 'price_bond_t0', 'price_bond_tT',
    'risk_neutral_default_curve', 'simulate_loss_plain', 'simulate_loss_plain_mtm', 'solve_factor_shift',
    'solve_tilt_t', 'solve_tilting', 'thresholds', 'value_bond', 'value_portfolio',
]
