"""
Rating migration thresholds, risk-neutral default curves and bond valuation
for the mark-to-market model.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd
from scipy import special

from concentration_risk.errors import InvalidParameterError, MissingLgdError, NegativePriceError
from concentration_risk.marketdata.curves import YieldCurve
from concentration_risk.portfolio.models import MTM, MtmObligor, Portfolio
from concentration_risk.portfolio.transitions import TransitionMatrix, load_default_transition_matrix
from concentration_risk.stochastics.quantiles import QUANTILE_RULES

CUMULATIVE_CLIP = 1e-12
GRID_TOLERANCE = 1e-9

logger = logging.getLogger(__name__)

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class MtmMarketParams:
    """
    Market and simulation parameters of the mark-to-market model.

    The horizon must be a coupon date, i.e. a multiple of the accrual period.
    ``matrix`` defaults to the shipped one-year sovereign matrix.
    """

    horizon: float = 1.0
    accrual: float = 0.5
    yield_curve: YieldCurve = field(default_factory=lambda: YieldCurve.flat(0.0))
    sharpe: float = 0.4
    q: float = 0.999
    n_sims: int = 200000
    seed: int = 0
    matrix: Optional[TransitionMatrix] = None
    quantile_rule: str = 'cumulative'
    block_size: int = 2000
    spline_points: int = 200
    threads: int = 1

    def __post_init__(self):
        if not self.horizon > 0.0 or not self.accrual > 0.0:
            raise InvalidParameterError(f"Horizon and accrual must be positive, got {self.horizon}, {self.accrual}")
        periods = self.horizon / self.accrual
        if abs(periods - round(periods)) > GRID_TOLERANCE:
            raise InvalidParameterError(f"Horizon {self.horizon} is not a multiple of the accrual {self.accrual}")
        if self.sharpe < 0.0:
            raise InvalidParameterError(f"Sharpe ratio must be nonnegative, got {self.sharpe}")
        if not 0.0 < self.q < 1.0:
            raise InvalidParameterError(f"Confidence level must lie in (0, 1), got {self.q}")
        if self.n_sims < 1:
            raise InvalidParameterError(f"Number of simulations must be positive, got {self.n_sims}")
        if self.quantile_rule not in QUANTILE_RULES:
            raise InvalidParameterError(f"Unknown quantile rule '{self.quantile_rule}'")
        if self.spline_points < 4:
            raise InvalidParameterError(f"Need at least 4 spline points, got {self.spline_points}")
        if self.matrix is None:
            object.__setattr__(self, 'matrix', load_default_transition_matrix())

    @property
    def discount_horizon(self) -> float:
        """Risk-free discount factor to the horizon."""
        return float(self.yield_curve.discount(self.horizon))


class ThresholdTable:
    """
    Migration thresholds C[g, s] = inverse normal of the cumulative row sums.

    ``bounds[g]`` holds (-inf, C[g, 0], ..., C[g, S-1], +inf), so state s of
    grade g is reached when the latent return lies in (bounds[g, s], bounds[g, s+1]].
    """

    def __init__(self, labels: Sequence[str], bounds: np.ndarray, cumulative: np.ndarray):
        self.labels = tuple(labels)
        self.bounds = bounds
        self.cumulative = cumulative
        self.bounds.setflags(write=False)

    @property
    def C(self) -> np.ndarray:
        """(S+1)x(S+1) table with C[g, S] = +inf."""
        return self.bounds[:, 1:]

    @property
    def n_states(self) -> int:
        return len(self.labels) - 1

    def to_frame(self) -> pd.DataFrame:
        """Thresholds as a labelled table (rows: current grade, columns: state)."""
        return pd.DataFrame(self.C, index=list(self.labels), columns=list(self.labels))


def thresholds(matrix: TransitionMatrix) -> ThresholdTable:
    """
    Migration thresholds of a transition matrix.

    Cumulative sums are clipped to (1e-12, 1 - 1e-12) before inversion, so
    zero-probability steps give equal neighbouring thresholds.

    Args:
        matrix: Row-stochastic transition matrix

    Returns:
        ThresholdTable: Threshold table
    """
    cumulative = np.cumsum(matrix.probs, axis=1)[:, :-1]
    clipped = np.clip(cumulative, CUMULATIVE_CLIP, 1.0 - CUMULATIVE_CLIP)
    rows = clipped.shape[0]
    bounds = np.empty((rows, rows + 1))
    bounds[:, 0] = -np.inf
    bounds[:, 1:-1] = special.ndtri(clipped)
    bounds[:, -1] = np.inf
    return ThresholdTable(matrix.labels, bounds, clipped)


def migration_probabilities(bounds: np.ndarray, x: ArrayLike, rho: ArrayLike) -> np.ndarray:
    """
    Conditional state probabilities for threshold rows and factor values.

    Args:
        bounds: Threshold rows, shape (..., S+2)
        x: Factor values, broadcast against the leading axes of ``bounds``
        rho: Asset correlations, broadcast like ``x``

    Returns:
        np.ndarray: Probabilities of shape (..., S+1)
    """
    x = np.asarray(x, dtype=float)[..., None]
    rho = np.asarray(rho, dtype=float)[..., None]
    z = (bounds - x * np.sqrt(rho)) / np.sqrt(1.0 - rho)
    lower, upper = z[..., :-1], z[..., 1:]
    # survival differences keep precision in the upper tail
    return np.where(lower > 0.0, special.ndtr(-lower) - special.ndtr(-upper),
                    special.ndtr(upper) - special.ndtr(lower))


def conditional_migration(grade: int, x: ArrayLike, rho: float, table: ThresholdTable) -> np.ndarray:
    """
    Probabilities of every state at the horizon given the factor.

    Args:
        grade: Current grade index
        x: Factor value (scalar or array)
        rho: Asset correlation in (0, 1)
        table: Threshold table

    Returns:
        np.ndarray: Shape (S+1,) or (len(x), S+1)
    """
    if not 0.0 < rho < 1.0:
        raise InvalidParameterError(f"Asset correlation must lie in (0, 1), got {rho}")
    return migration_probabilities(table.bounds[grade], x, rho)


def risk_neutral_default_curve(grade: int, matrix: TransitionMatrix, rho: float, psi: float,
                               tenors: Sequence[float]) -> np.ndarray:
    """
    Risk-neutral cumulative default probabilities p*(0, t).

    p* = Phi(Phi^-1(p) + psi sqrt(t) sqrt(rho)) with physical p from matrix
    powers, linearly interpolated between whole years.

    Args:
        grade: Current grade index
        matrix: One-year transition matrix
        rho: Asset correlation
        psi: Market Sharpe ratio
        tenors: Year fractions

    Returns:
        np.ndarray: Probabilities, nondecreasing in the tenor
    """
    tenors = np.asarray(tenors, dtype=float)
    physical = matrix.cumulative_default(tenors)[grade]
    return _risk_neutral(physical, tenors, rho, psi)


def _risk_neutral(physical: np.ndarray, tenors: np.ndarray, rho: float, psi: float) -> np.ndarray:
    interior = (physical > 0.0) & (physical < 1.0)
    result = np.where(physical >= 1.0, 1.0, 0.0)
    if np.any(interior):
        shift = psi * np.sqrt(tenors) * math.sqrt(rho)
        shifted = special.ndtr(special.ndtri(np.where(interior, physical, 0.5)) + shift)
        result = np.where(interior, shifted, result)
    return result


class RiskNeutralCurve:
    """Risk-neutral default curves of all grades for one asset correlation."""

    def __init__(self, matrix: TransitionMatrix, rho: float, psi: float):
        self.matrix = matrix
        self.rho = rho
        self.psi = psi

    def table(self, tenors: Sequence[float]) -> np.ndarray:
        """p*(0, t) for every grade, shape (S+1, len(tenors))."""
        tenors = np.asarray(tenors, dtype=float)
        physical = self.matrix.cumulative_default(tenors)
        return _risk_neutral(physical, tenors[None, :], self.rho, self.psi)

    def __call__(self, grade: int, tenors: Sequence[float]) -> np.ndarray:
        return self.table(tenors)[grade]


def coupon_dates(maturity: float, accrual: float) -> np.ndarray:
    """
    Coupon dates delta, 2 delta, ..., maturity.

    Raises:
        InvalidParameterError: If the maturity is off the accrual grid
    """
    periods = maturity / accrual
    count = int(round(periods))
    if count < 1 or abs(periods - count) > GRID_TOLERANCE:
        raise InvalidParameterError(f"Maturity {maturity} is not a positive multiple of the accrual {accrual}")
    return accrual * np.arange(1, count + 1)


def _forward_values(ob: MtmObligor, mkt: MtmMarketParams, dates: np.ndarray, at: np.ndarray) -> np.ndarray:
    """Default-free value F(t) at each ``at`` of the cash flows on or after t."""
    curve = mkt.yield_curve
    cash = np.full(dates.size, ob.coupon * mkt.accrual)
    cash[-1] += 1.0
    discounts = curve.discount(dates)
    at = np.atleast_1d(np.asarray(at, dtype=float))
    live = dates[None, :] >= at[:, None] - GRID_TOLERANCE
    return (live * cash * discounts).sum(axis=1) / np.asarray(curve.discount(at))


def _resolve_curve(ob: MtmObligor, mkt: MtmMarketParams, rn_curve: Optional[RiskNeutralCurve]) -> RiskNeutralCurve:
    return rn_curve if rn_curve is not None else RiskNeutralCurve(mkt.matrix, ob.rho, mkt.sharpe)


def price_bond_t0(ob: MtmObligor, mkt: MtmMarketParams, rn_curve: Optional[RiskNeutralCurve] = None) -> float:
    """
    Current value of a defaultable coupon bond with face value one.

    The holder recovers (1 - ELGD) of the no-default value at default.

    Args:
        ob: Obligor holding the bond
        mkt: Market parameters
        rn_curve: Risk-neutral default curves (built from ``mkt`` if None)

    Returns:
        float: Bond value P0

    Raises:
        NegativePriceError: If the value is not positive
    """
    rn_curve = _resolve_curve(ob, mkt, rn_curve)
    dates = coupon_dates(ob.maturity, mkt.accrual)
    forward = _forward_values(ob, mkt, dates, np.concatenate([[0.0], dates]))
    cumulative = rn_curve(ob.rating, np.concatenate([[0.0], dates]))
    marginal = np.diff(cumulative)
    discounts = mkt.yield_curve.discount(dates)
    value = float(forward[0] - np.sum(discounts * marginal * ob.elgd * forward[1:]))
    if not value > 0.0:
        logger.error(f"Obligor {ob.obligor_id}: non-positive bond value {value}")
        raise NegativePriceError(f"Obligor {ob.obligor_id}: bond value {value} is not positive",
                                 details={'obligor_id': ob.obligor_id, 'value': value})
    return value


def _horizon_parts(ob: MtmObligor, mkt: MtmMarketParams, dates: np.ndarray) -> Tuple[float, float]:
    """Compounded coupons received before T and the forward value F(T)."""
    horizon = mkt.horizon
    if dates[-1] < horizon - GRID_TOLERANCE:
        raise InvalidParameterError(f"Obligor {ob.obligor_id}: maturity {ob.maturity} precedes the horizon {horizon}")
    curve = mkt.yield_curve
    received = dates < horizon - GRID_TOLERANCE
    accrued = float(np.sum(ob.coupon * mkt.accrual * curve.forward_discount(horizon, dates[received])))
    forward = float(_forward_values(ob, mkt, dates, np.array([horizon]))[0])
    return accrued, forward


def price_bond_tT(ob: MtmObligor, mkt: MtmMarketParams, rn_curve: Optional[RiskNeutralCurve], state: int,
                  realized_lgd: Optional[float] = None, expectation: bool = False) -> float:
    """
    Bond value at the horizon given the state there.

    Non-default states discount the remaining cash flows with the default
    curve of the new grade, shifted to start at T. In default the obligor
    defaults just before T: coupons paid before T are kept and the rest
    recovers (1 - LGD) F(T).

    Args:
        ob: Obligor holding the bond
        mkt: Market parameters
        rn_curve: Risk-neutral default curves (built from ``mkt`` if None)
        state: Horizon state, 0 for default
        realized_lgd: LGD realization, required for the default state unless ``expectation``
        expectation: Use ELGD in the default state

    Returns:
        float: Bond value P_T(state)

    Raises:
        MissingLgdError: If the default state lacks an LGD
    """
    rn_curve = _resolve_curve(ob, mkt, rn_curve)
    n_grades = len(mkt.matrix.labels)
    if not 0 <= state < n_grades:
        raise InvalidParameterError(f"State {state} outside 0..{n_grades - 1}")
    dates = coupon_dates(ob.maturity, mkt.accrual)
    accrued, forward = _horizon_parts(ob, mkt, dates)

    if state == 0:
        if realized_lgd is None:
            if not expectation:
                raise MissingLgdError(f"Obligor {ob.obligor_id}: default-state value needs a realized LGD")
            realized_lgd = ob.elgd
        return accrued + (1.0 - realized_lgd) * forward

    return accrued + forward - _expected_default_cost(ob, mkt, rn_curve.table, dates)[state]


def _expected_default_cost(ob: MtmObligor, mkt: MtmMarketParams, table, dates: np.ndarray) -> np.ndarray:
    """Discounted expected default loss on cash flows after T, per horizon state."""
    horizon = mkt.horizon
    later = dates > horizon + GRID_TOLERANCE
    if not np.any(later):
        return np.zeros(len(mkt.matrix.labels))
    later_dates = dates[later]
    cumulative = table(np.concatenate([[0.0], later_dates - horizon]))
    marginal = cumulative[:, 1:] - cumulative[:, :-1]
    discounts = mkt.yield_curve.forward_discount(horizon, later_dates)
    forward = _forward_values(ob, mkt, dates, later_dates)
    return (marginal * (discounts * ob.elgd * forward)[None, :]).sum(axis=1)


@dataclass(frozen=True)
class BondValuation:
    """
    Value of one bond today and per horizon state.

    ``p_t[0]`` and ``lambdas[0]`` use ELGD; simulated default values use the
    realized LGD through ``default_return``.
    """

    p0: float
    p_t: np.ndarray
    lambdas: np.ndarray
    accrued: float
    forward: float

    def default_return(self, lgd: ArrayLike) -> ArrayLike:
        """Return P_T(0) / P0 for realized LGD values."""
        return (self.accrued + (1.0 - np.asarray(lgd)) * self.forward) / self.p0


def value_bond(ob: MtmObligor, mkt: MtmMarketParams, rn_curve: Optional[RiskNeutralCurve] = None) -> BondValuation:
    """
    Value one bond today and in every horizon state.

    Args:
        ob: Obligor holding the bond
        mkt: Market parameters
        rn_curve: Risk-neutral default curves (built from ``mkt`` if None)

    Returns:
        BondValuation: Prices and expected returns per state
    """
    rn_curve = _resolve_curve(ob, mkt, rn_curve)
    p0 = price_bond_t0(ob, mkt, rn_curve)
    dates = coupon_dates(ob.maturity, mkt.accrual)
    accrued, forward = _horizon_parts(ob, mkt, dates)
    p_t = accrued + forward - _expected_default_cost(ob, mkt, rn_curve.table, dates)
    p_t[0] = accrued + (1.0 - ob.elgd) * forward
    p_t.setflags(write=False)
    lambdas = p_t / p0
    lambdas.setflags(write=False)
    return BondValuation(p0=p0, p_t=p_t, lambdas=lambdas, accrued=accrued, forward=forward)


class PortfolioValuation:
    """
    Read-only valuation tables of an MtM portfolio.

    Arrays are indexed by obligor (N) and horizon state (S+1).
    """

    def __init__(self, portfolio: Portfolio, mkt: MtmMarketParams, table: ThresholdTable,
                 bonds: Sequence[BondValuation]):
        self.portfolio = portfolio
        self.mkt = mkt
        self.table = table
        self.bonds = tuple(bonds)
        self.shares = np.array(portfolio.shares)
        self.rhos = np.array(portfolio.rhos)
        self.ratings = np.array(portfolio.ratings)
        self.elgds = np.array(portfolio.elgds)
        self.lgd_nu = portfolio.lgd_nu
        self.bounds = table.bounds[self.ratings]
        self.lambdas = np.stack([bond.lambdas for bond in self.bonds])
        self.p0 = np.array([bond.p0 for bond in self.bonds])
        self.accrued_ratio = np.array([bond.accrued / bond.p0 for bond in self.bonds])
        self.forward_ratio = np.array([bond.forward / bond.p0 for bond in self.bonds])

    @property
    def n_obligors(self) -> int:
        return self.shares.size

    @property
    def n_states(self) -> int:
        return self.lambdas.shape[1] - 1

    def migration(self, x: ArrayLike) -> np.ndarray:
        """State probabilities of every obligor, shape (..., N, S+1)."""
        x = np.asarray(x, dtype=float)
        return migration_probabilities(self.bounds, x[..., None], self.rhos)

    def obligor_means(self, x: ArrayLike) -> np.ndarray:
        """Conditional expected returns mu_n(x), shape (..., N)."""
        return (self.migration(x) * self.lambdas).sum(axis=-1)

    def default_returns(self, lgd: np.ndarray) -> np.ndarray:
        """Default-state returns for realized LGDs of shape (..., N)."""
        return self.accrued_ratio + (1.0 - lgd) * self.forward_ratio

    def state_losses(self) -> np.ndarray:
        """Loss contribution -a_n lambda_ns of each obligor and state (ELGD in default)."""
        return -self.shares[:, None] * self.lambdas


def value_portfolio(portfolio: Portfolio, mkt: MtmMarketParams) -> PortfolioValuation:
    """
    Valuation tables of every bond in an MtM portfolio.

    Obligors sharing rating, ELGD, correlation, coupon and maturity share one
    valuation.

    Args:
        portfolio: MtM portfolio
        mkt: Market parameters

    Returns:
        PortfolioValuation: Read-only valuation tables
    """
    portfolio.require_kind(MTM)
    if portfolio.ratings.max() > mkt.matrix.n_states:
        raise InvalidParameterError(
            f"Rating index {portfolio.ratings.max()} outside the {mkt.matrix.n_states}-grade matrix")
    table = thresholds(mkt.matrix)
    cache: Dict[tuple, BondValuation] = {}
    curves: Dict[float, RiskNeutralCurve] = {}
    bonds = []
    for ob in portfolio.obligors:
        key = (ob.rating, ob.elgd, ob.rho, ob.coupon, ob.maturity)
        if key not in cache:
            if ob.rho not in curves:
                curves[ob.rho] = RiskNeutralCurve(mkt.matrix, ob.rho, mkt.sharpe)
            cache[key] = value_bond(ob, mkt, curves[ob.rho])
        bonds.append(cache[key])
    logger.debug(f"Valued {len(bonds)} bonds ({len(cache)} distinct)")
    return PortfolioValuation(portfolio, mkt, table, bonds)
