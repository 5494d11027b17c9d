"""
Engine context: one bundle of model parameters shared by the GA methods.
"""
import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Tuple

from concentration_risk.analytic.actuarial import ga_first_order_actuarial
from concentration_risk.analytic.mtm import ga_first_order_mtm
from concentration_risk.engines import cmetrics, crplus
from concentration_risk.engines.crplus import CrPlusParams
from concentration_risk.engines.results import GaResult, LossSampleSet
from concentration_risk.engines.valuation import MtmMarketParams, PortfolioValuation, value_portfolio
from concentration_risk.errors import InvalidParameterError
from concentration_risk.marketdata.curves import YieldCurve
from concentration_risk.portfolio.models import ACTUARIAL, MTM, Portfolio
from concentration_risk.portfolio.transitions import TransitionMatrix, load_default_transition_matrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EngineContext:
    """
    Parameters of both models plus portfolio conventions.

    Methods dispatch on the portfolio's model kind.
    """

    crplus: CrPlusParams
    mtm: MtmMarketParams
    lgd_nu: float = 0.25
    max_obligors: int = 100

    @classmethod
    def from_settings(cls, settings: Dict[str, Any], curve: Optional[YieldCurve] = None,
                      matrix: Optional[TransitionMatrix] = None) -> 'EngineContext':
        """
        Build a context from a validated settings tree.

        Args:
            settings: Output of load_settings
            curve: Yield curve overriding ``settings['curve']``
            matrix: Transition matrix (default: shipped sovereign matrix)

        Returns:
            EngineContext: Context
        """
        seed, threads = int(settings['seed']), int(settings['threads'])
        act = settings['crplus']
        mtm = settings['mtm']
        crplus_params = CrPlusParams(xi=act['xi'], q=act['q'], n_sims=act['n_sims'], seed=seed,
                                     quantile_rule=act['quantile_rule'], block_size=act['block_size'],
                                     threads=threads)
        market = MtmMarketParams(horizon=mtm['horizon'], accrual=mtm['accrual'],
                                 yield_curve=curve or YieldCurve.from_dict(settings['curve']),
                                 sharpe=mtm['sharpe'], q=mtm['q'], n_sims=mtm['n_sims'], seed=seed,
                                 matrix=matrix or load_default_transition_matrix(),
                                 quantile_rule=mtm['quantile_rule'], block_size=mtm['block_size'],
                                 spline_points=mtm['spline_points'], threads=threads)
        return cls(crplus=crplus_params, mtm=market, lgd_nu=settings['lgd']['nu'],
                   max_obligors=settings['portfolio']['max_obligors'])

    @property
    def matrix(self) -> TransitionMatrix:
        return self.mtm.matrix

    def with_seed(self, seed: int) -> 'EngineContext':
        """Copy with another simulation seed for both models."""
        return replace(self, crplus=replace(self.crplus, seed=seed), mtm=replace(self.mtm, seed=seed))

    def with_sims(self, n_sims: int) -> 'EngineContext':
        """Copy with another path count for both models."""
        return replace(self, crplus=replace(self.crplus, n_sims=n_sims), mtm=replace(self.mtm, n_sims=n_sims))

    def with_q(self, q: float) -> 'EngineContext':
        """Copy with another confidence level for both models."""
        return replace(self, crplus=replace(self.crplus, q=q), mtm=replace(self.mtm, q=q))

    def with_threads(self, threads: int) -> 'EngineContext':
        return replace(self, crplus=replace(self.crplus, threads=threads), mtm=replace(self.mtm, threads=threads))

    def valuations(self, portfolio: Portfolio) -> PortfolioValuation:
        return value_portfolio(portfolio, self.mtm)

    def ga_exact(self, portfolio: Portfolio) -> GaResult:
        """Monte Carlo GA with importance sampling."""
        if portfolio.model_kind == ACTUARIAL:
            return crplus.ga_exact_actuarial(portfolio, self.crplus)
        return cmetrics.ga_exact_mtm(portfolio, self.mtm)

    def ga_analytic(self, portfolio: Portfolio) -> float:
        """First-order analytic GA."""
        if portfolio.model_kind == ACTUARIAL:
            return ga_first_order_actuarial(portfolio, self.crplus.xi, self.crplus.q)
        return ga_first_order_mtm(portfolio, self.mtm)

    def var(self, portfolio: Portfolio, method: str = 'is') -> Tuple[float, LossSampleSet]:
        """
        Value at risk of the portfolio loss.

        Args:
            portfolio: Portfolio of either kind
            method: 'is' (importance sampling) or 'plain'

        Returns:
            Tuple: (estimate, samples)
        """
        if method not in ('is', 'plain'):
            raise InvalidParameterError(f"Unknown VaR method '{method}', expected 'is' or 'plain'")
        if portfolio.model_kind == ACTUARIAL:
            run = crplus.is_var if method == 'is' else crplus.plain_var
            return run(portfolio, self.crplus)
        run = cmetrics.is_var_mtm if method == 'is' else cmetrics.plain_var_mtm
        return run(portfolio, self.mtm)

    def q(self, model_kind: str) -> float:
        return self.crplus.q if model_kind == ACTUARIAL else self.mtm.q

    def describe(self) -> Dict[str, Any]:
        """Parameters for logs and report headers."""
        return {
            ACTUARIAL: {'xi': self.crplus.xi, 'q': self.crplus.q, 'n_sims': self.crplus.n_sims,
                        'seed': self.crplus.seed},
            MTM: {'horizon': self.mtm.horizon, 'accrual': self.mtm.accrual, 'sharpe': self.mtm.sharpe,
                  'q': self.mtm.q, 'n_sims': self.mtm.n_sims, 'seed': self.mtm.seed,
                  'curve': self.mtm.yield_curve.to_dict()},
            'lgd_nu': self.lgd_nu,
        }
