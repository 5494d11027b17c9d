"""
Shared fixtures: settings, the shipped transition matrix, small portfolios
and engine contexts with small simulation budgets.
"""
import pytest

from concentration_risk.engines.context import EngineContext
from concentration_risk.portfolio.models import ACTUARIAL, MTM, ActuarialObligor, MtmObligor, Portfolio
from concentration_risk.portfolio.transitions import load_default_transition_matrix
from concentration_risk.settings import load_settings

FAST_SIMS = 4000

# grade indices of the shipped matrix
GRADE_B = 3
GRADE_BB = 6
GRADE_BBB = 9
GRADE_A_MINUS = 11


@pytest.fixture(scope='session')
def settings():
    return load_settings()


@pytest.fixture(scope='session')
def matrix():
    return load_default_transition_matrix()


@pytest.fixture
def engines(settings, matrix):
    return EngineContext.from_settings(settings, matrix=matrix).with_sims(FAST_SIMS)


@pytest.fixture
def actuarial_portfolio():
    obligors = (
        ActuarialObligor('O001', 10.0, 0.01, 0.45, 0.8),
        ActuarialObligor('O002', 4.0, 0.0238, 0.10, 0.3),
        ActuarialObligor('O003', 6.0, 0.004, 0.45, 0.5),
        ActuarialObligor('O004', 2.0, 0.0759, 0.45, 0.9),
        ActuarialObligor('O005', 8.0, 0.0018, 0.10, 0.6),
    )
    return Portfolio(obligors, 0.25, ACTUARIAL)


@pytest.fixture
def mtm_portfolio(matrix):
    obligors = (
        MtmObligor('O001', 10.0, GRADE_BBB, 0.45, 0.2, 0.03, 5.0),
        MtmObligor('O002', 4.0, GRADE_A_MINUS, 0.10, 0.4, 0.01, 2.5),
        MtmObligor('O003', 6.0, GRADE_BB, 0.45, 0.3, 0.05, 3.0),
        MtmObligor('O004', 2.0, GRADE_B, 0.45, 0.25, 0.0, 1.0),
    )
    return Portfolio(obligors, 0.25, MTM, grade_labels=matrix.labels)


def homogeneous_actuarial(count: int, pd: float = 0.01, elgd: float = 0.45, omega: float = 0.5,
                          nu: float = 0.25) -> Portfolio:
    obligors = tuple(ActuarialObligor(f"O{i + 1:03d}", 1.0, pd, elgd, omega) for i in range(count))
    return Portfolio(obligors, nu, ACTUARIAL)


def homogeneous_mtm(count: int, rating: int = GRADE_BB, rho: float = 0.2, nu: float = 0.25) -> Portfolio:
    obligors = tuple(MtmObligor(f"O{i + 1:03d}", 1.0, rating, 0.45, rho, 0.03, 3.0) for i in range(count))
    return Portfolio(obligors, nu, MTM)
