"""
Synthetic portfolio sampling and real-portfolio preparation.
"""
from concentration_risk.sampler.batch import sample_portfolio, write_portfolio_batch
from concentration_risk.sampler.calibration import (OmegaCalibration, calibrate_omega, irb_asset_correlation,
                                                    irb_capital, prepare_real_portfolio)
from concentration_risk.sampler.config import PD_SUPPORT, PD_WEIGHTS, SamplerConfig
from concentration_risk.sampler.generate import grade_map, sample_actuarial_portfolio, sample_mtm_portfolio

__all__ = [
    'OmegaCalibration', 'PD_SUPPORT', 'PD_WEIGHTS', 'SamplerConfig', 'calibrate_omega', 'grade_map',
    'irb_asset_correlation', 'irb_capital', 'prepare_real_portfolio', 'sample_actuarial_portfolio',
    'sample_mtm_portfolio', 'sample_portfolio', 'write_portfolio_batch',
]
