"""
Portfolio data model, transition matrices and file I/O.
"""
from concentration_risk.portfolio.io import load_portfolio, save_portfolio
from concentration_risk.portfolio.models import (ACTUARIAL, MODEL_KINDS, MTM, ActuarialObligor, MtmObligor,
                                                 Portfolio, exposure_shares)
from concentration_risk.portfolio.transitions import (TransitionMatrix, load_default_transition_matrix,
                                                      load_transition_matrix)

__all__ = [
    'ACTUARIAL', 'MODEL_KINDS', 'MTM', 'ActuarialObligor', 'MtmObligor', 'Portfolio', 'TransitionMatrix',
    'exposure_shares', 'load_default_transition_matrix', 'load_portfolio', 'load_transition_matrix',
    'save_portfolio',
]
