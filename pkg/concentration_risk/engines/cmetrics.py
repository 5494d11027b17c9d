"""
Mark-to-market CreditMetrics engine: conditional expected returns, factor
shift and per-path default tilting, plain and importance-sampled loss
simulation and the exact granularity adjustment.
"""
import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import logsumexp

from concentration_risk.engines.parallel import block_size_for, run_blocks
from concentration_risk.engines.results import GaResult, LossSampleSet
from concentration_risk.engines.valuation import MtmMarketParams, PortfolioValuation, value_portfolio
from concentration_risk.errors import NonMonotoneError
from concentration_risk.portfolio.models import MTM, Portfolio
from concentration_risk.stochastics.distributions import sample_lgd_matrix
from concentration_risk.stochastics.quantiles import weighted_quantile
from concentration_risk.stochastics.solvers import solve_monotone
from concentration_risk.stochastics.special import normal_quantile
from concentration_risk.stochastics.streams import RandomStream

IS_STREAM = 3
PLAIN_STREAM = 4

# |t| at which an unattainable target mean is reported
T_LIMIT = 1e6
SPLINE_HALF_WIDTH = 5.0
SPLINE_SLACK = 0.1
MONOTONE_PROBE = 0.5

logger = logging.getLogger(__name__)


def mu_conditional(portfolio: Portfolio, x: float, valuations: PortfolioValuation) -> float:
    """
    Conditional expected portfolio return sum a_n sum_s lambda_ns pi_ns(x).

    Args:
        portfolio: MtM portfolio
        x: Factor value
        valuations: Valuation tables of the portfolio

    Returns:
        float: Expected return given X = x
    """
    portfolio.require_kind(MTM)
    return float(np.dot(valuations.shares, valuations.obligor_means(x)))


def _tilted_mean(t: float, log_pi: np.ndarray, state_losses: np.ndarray) -> float:
    """Mean of L under the tilt exp(t L) given the factor."""
    logits = log_pi + t * state_losses
    weights = np.exp(logits - logsumexp(logits, axis=-1, keepdims=True))
    return float(np.sum(weights * state_losses))


def _log_pi(pi: np.ndarray) -> np.ndarray:
    with np.errstate(divide='ignore'):
        return np.log(pi)


def solve_tilt_t(c: float, x: float, portfolio: Portfolio, valuations: PortfolioValuation) -> float:
    """
    Tilt t for which the conditional mean of L under exp(t L) equals c.

    The tilted mean is increasing in t. If c lies outside the range of L
    given x the boundary value +-T_LIMIT is returned.

    Args:
        c: Target loss level
        x: Factor value
        portfolio: MtM portfolio
        valuations: Valuation tables of the portfolio

    Returns:
        float: Tilt parameter
    """
    portfolio.require_kind(MTM)
    pi = valuations.migration(x)
    state_losses = valuations.state_losses()
    possible = pi > 0.0
    lowest = float(np.sum(np.where(possible, state_losses, np.inf).min(axis=-1)))
    highest = float(np.sum(np.where(possible, state_losses, -np.inf).max(axis=-1)))
    if highest - lowest < 1e-14:
        return 0.0
    if c <= lowest:
        logger.debug(f"Target {c} below attainable losses at x={x}")
        return -T_LIMIT
    if c >= highest:
        logger.debug(f"Target {c} above attainable losses at x={x}")
        return T_LIMIT

    log_pi = _log_pi(pi)
    return solve_monotone(lambda t: _tilted_mean(t, log_pi, state_losses) - c, -1.0, 1.0, tol=1e-12,
                          limits=(-T_LIMIT, T_LIMIT))


class TiltCache:
    """
    Cubic spline of t(c, x) on a grid around the factor shift.

    Factor values off the grid by more than SPLINE_SLACK are solved exactly,
    as is everything when a grid point hits the boundary.
    """

    def __init__(self, c: float, center: float, portfolio: Portfolio, valuations: PortfolioValuation,
                 points: int):
        self.c = c
        self.portfolio = portfolio
        self.valuations = valuations
        self.grid = np.linspace(center - SPLINE_HALF_WIDTH, center + SPLINE_HALF_WIDTH, points)
        values = np.array([solve_tilt_t(c, x, portfolio, valuations) for x in self.grid])
        self.spline: Optional[CubicSpline] = None
        if np.all(np.abs(values) < T_LIMIT):
            self.spline = CubicSpline(self.grid, values)
        else:
            logger.debug("Tilt boundary on the spline grid, solving every path exactly")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.spline is None:
            inside = np.zeros(x.shape, dtype=bool)
        else:
            inside = (x >= self.grid[0] - SPLINE_SLACK) & (x <= self.grid[-1] + SPLINE_SLACK)
        t = np.empty_like(x)
        if np.any(inside):
            t[inside] = self.spline(x[inside])
        for index in np.flatnonzero(~inside):
            t[index] = solve_tilt_t(self.c, float(x[index]), self.portfolio, self.valuations)
        return t


def solve_factor_shift(portfolio: Portfolio, mkt: MtmMarketParams, valuations: PortfolioValuation) -> float:
    """
    Mean shift of the Gaussian factor for importance sampling.

    Solves -sum a_n mu_n(x) = c with c the expected loss given the factor at
    its (1 - q)-quantile, after checking that the conditional expected loss
    decreases around that point.

    Args:
        portfolio: MtM portfolio
        mkt: Market parameters
        valuations: Valuation tables of the portfolio

    Returns:
        float: Shift mu

    Raises:
        NonMonotoneError: If the conditional expected loss increases in x
    """
    x_star = normal_quantile(1.0 - mkt.q)
    c = -mu_conditional(portfolio, x_star, valuations)

    def excess(x: float) -> float:
        return -mu_conditional(portfolio, x, valuations) - c

    probes = x_star + MONOTONE_PROBE * np.array([-1.0, 0.0, 1.0])
    losses = np.array([-mu_conditional(portfolio, x, valuations) for x in probes])
    steps = np.diff(losses)
    if np.any(steps > 1e-15):
        logger.error(f"Conditional expected loss increases around x={x_star}: {losses.tolist()}")
        raise NonMonotoneError(f"Conditional expected loss is not decreasing around x={x_star}",
                               details={'x': probes.tolist(), 'loss': losses.tolist()})
    if np.all(steps > -1e-15):
        return x_star
    return solve_monotone(excess, x_star - 1.0, x_star + 1.0, tol=1e-12)


def _simulate_block_is(valuations: PortfolioValuation, mu: float, tilt: TiltCache, n_paths: int,
                       generator: np.random.Generator):
    shares = valuations.shares

    factor = generator.normal(mu, 1.0, size=n_paths)
    t = tilt(factor)
    lgd = sample_lgd_matrix(valuations.elgds, valuations.lgd_nu, generator, n_paths)

    returns = np.broadcast_to(valuations.lambdas, (n_paths,) + valuations.lambdas.shape).copy()
    returns[..., 0] = valuations.default_returns(lgd)
    state_losses = -shares[:, None] * returns

    logits = _log_pi(valuations.migration(factor)) + t[:, None, None] * state_losses
    log_normalizer = logsumexp(logits, axis=-1)
    probs = np.exp(logits - log_normalizer[..., None])
    cumulative = np.cumsum(probs, axis=-1)
    uniforms = generator.random((n_paths, shares.size))
    states = np.minimum((cumulative < uniforms[..., None]).sum(axis=-1), valuations.n_states)

    losses = np.take_along_axis(state_losses, states[..., None], axis=-1)[..., 0].sum(axis=1)
    log_weights = log_normalizer.sum(axis=1) - t * losses - mu * factor + 0.5 * mu * mu
    return {
        'loss': losses,
        'log_weight': log_weights,
        'boundary': np.abs(t) >= T_LIMIT,
    }


def _simulate_block_plain(valuations: PortfolioValuation, n_paths: int, generator: np.random.Generator):
    shares, rhos = valuations.shares, valuations.rhos
    factor = generator.standard_normal(n_paths)
    noise = generator.standard_normal((n_paths, shares.size))
    latent = np.sqrt(rhos) * factor[:, None] + np.sqrt(1.0 - rhos) * noise
    lgd = sample_lgd_matrix(valuations.elgds, valuations.lgd_nu, generator, n_paths)

    interior = valuations.bounds[:, 1:-1]
    states = (latent[..., None] > interior).sum(axis=-1)
    returns = np.take_along_axis(np.broadcast_to(valuations.lambdas, (n_paths,) + valuations.lambdas.shape),
                                 states[..., None], axis=-1)[..., 0]
    returns = np.where(states == 0, valuations.default_returns(lgd), returns)
    return {'loss': -(shares * returns).sum(axis=1)}


def _valuations(portfolio: Portfolio, mkt: MtmMarketParams,
                valuations: Optional[PortfolioValuation]) -> PortfolioValuation:
    portfolio.require_kind(MTM)
    return valuations if valuations is not None else value_portfolio(portfolio, mkt)


def simulate_loss_plain_mtm(portfolio: Portfolio, mkt: MtmMarketParams, valuations: Optional[PortfolioValuation],
                            stream: RandomStream) -> np.ndarray:
    """
    Plain Monte Carlo draws of the MtM loss -sum a_n P_T(S_n) / P0.

    Args:
        portfolio: MtM portfolio
        mkt: Market parameters (n_sims draws)
        valuations: Valuation tables (computed if None)
        stream: Random stream

    Returns:
        np.ndarray: Losses in path order
    """
    valuations = _valuations(portfolio, mkt, valuations)
    block = block_size_for(valuations.n_obligors * (valuations.n_states + 1), mkt.block_size)

    def simulate(n_paths: int, generator: np.random.Generator):
        return _simulate_block_plain(valuations, n_paths, generator)

    return run_blocks(simulate, mkt.n_sims, block, stream, mkt.threads)['loss']


def plain_var_mtm(portfolio: Portfolio, mkt: MtmMarketParams,
                  valuations: Optional[PortfolioValuation] = None) -> Tuple[float, LossSampleSet]:
    """
    Value at risk of the MtM loss from plain Monte Carlo.

    Returns:
        Tuple: (estimate, unit-weight samples)
    """
    losses = simulate_loss_plain_mtm(portfolio, mkt, valuations, RandomStream(mkt.seed, PLAIN_STREAM))
    return weighted_quantile(losses, mkt.q), LossSampleSet(losses)


def is_var_mtm(portfolio: Portfolio, mkt: MtmMarketParams,
               valuations: Optional[PortfolioValuation] = None) -> Tuple[float, LossSampleSet]:
    """
    Value at risk of the MtM loss by importance sampling.

    The factor is drawn from N(mu, 1). Given the factor and the LGDs, each
    obligor's state is drawn from the categorical law tilted by
    exp(-t a_n P_T(s) / P0), with t solved per path.

    Args:
        portfolio: MtM portfolio
        mkt: Market parameters
        valuations: Valuation tables (computed if None)

    Returns:
        Tuple: (estimate, weighted samples with diagnostics)
    """
    valuations = _valuations(portfolio, mkt, valuations)
    mu = solve_factor_shift(portfolio, mkt, valuations)
    c = -mu_conditional(portfolio, normal_quantile(1.0 - mkt.q), valuations)
    tilt = TiltCache(c, mu, portfolio, valuations, mkt.spline_points)
    logger.info(f"Importance sampling {mkt.n_sims} MtM paths for {portfolio.n_obligors} obligors (shift {mu:.6g})")

    block = block_size_for(valuations.n_obligors * (valuations.n_states + 1), mkt.block_size)

    def simulate(n_paths: int, generator: np.random.Generator):
        return _simulate_block_is(valuations, mu, tilt, n_paths, generator)

    result = run_blocks(simulate, mkt.n_sims, block, RandomStream(mkt.seed, IS_STREAM), mkt.threads)
    boundary_fraction = float(np.mean(result['boundary']))
    if boundary_fraction > 0.0:
        logger.warning(f"Tilt at its boundary on {boundary_fraction:.4%} of paths")
    samples = LossSampleSet(result['loss'], result['log_weight'], diagnostics={
        'factor_shift': mu,
        'target_loss': c,
        'spline': tilt.spline is not None,
        'boundary_fraction': boundary_fraction,
    })
    estimate = weighted_quantile(samples.losses, mkt.q, samples.log_weights, mkt.quantile_rule)
    return estimate, samples


def ga_exact_mtm(portfolio: Portfolio, mkt: MtmMarketParams,
                 valuations: Optional[PortfolioValuation] = None) -> GaResult:
    """
    Exact MtM granularity adjustment d(T) (VaR - E[L | X = x*]) with
    x* the (1 - q)-quantile of the factor.

    Args:
        portfolio: MtM portfolio
        mkt: Market parameters
        valuations: Valuation tables (computed if None)

    Returns:
        GaResult: Result with ``exact`` set
    """
    valuations = _valuations(portfolio, mkt, valuations)
    var, samples = is_var_mtm(portfolio, mkt, valuations)
    x_star = normal_quantile(1.0 - mkt.q)
    conditional_loss = -mu_conditional(portfolio, x_star, valuations)
    discount = mkt.discount_horizon
    ga = discount * (var - conditional_loss)
    diagnostics = dict(samples.diagnostics)
    diagnostics.update({
        'var': var,
        'conditional_loss': conditional_loss,
        'factor_quantile': x_star,
        'discount': discount,
        'effective_sample_size': samples.effective_sample_size(),
        'n_sims': mkt.n_sims,
        'seed': mkt.seed,
        'quantile_rule': mkt.quantile_rule,
        'portfolio_sha256': portfolio.digest(),
    })
    if not math.isfinite(ga):
        logger.warning(f"Non-finite MtM GA {ga}")
    logger.info(f"Exact MtM GA {ga:.6g} (VaR {var:.6g}, conditional loss {conditional_loss:.6g})")
    return GaResult(MTM, exact=ga, diagnostics=diagnostics)
