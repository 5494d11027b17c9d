"""
Tests for migration thresholds, risk-neutral default curves and bond valuation.
"""
import math

import numpy as np
import pytest
from numpy.polynomial.hermite_e import hermegauss
from scipy import special

from concentration_risk.engines.valuation import (MtmMarketParams, RiskNeutralCurve, conditional_migration,
                                                  coupon_dates, price_bond_t0, price_bond_tT,
                                                  risk_neutral_default_curve, thresholds, value_bond,
                                                  value_portfolio)
from concentration_risk.errors import InvalidParameterError, KindMismatchError, MissingLgdError
from concentration_risk.marketdata.curves import YieldCurve
from concentration_risk.portfolio.models import MtmObligor
from concentration_risk.portfolio.transitions import TransitionMatrix

from conftest import GRADE_BBB, homogeneous_mtm

SAFE = TransitionMatrix(['D', 'A'], [[1.0, 0.0], [0.0, 1.0]])


def _market(matrix, rate=0.0, sharpe=0.4):
    return MtmMarketParams(yield_curve=YieldCurve.flat(rate), sharpe=sharpe, matrix=matrix, n_sims=100)


class TestThresholds:

    def test_worst_grade_default_threshold(self, matrix):
        table = thresholds(matrix)
        assert table.C[1, 0] == pytest.approx(special.ndtri(0.5147), abs=1e-12)
        assert table.C[1, 0] == pytest.approx(0.03686, abs=1e-5)

    def test_rows_nondecreasing(self, matrix):
        bounds = thresholds(matrix).bounds
        assert bounds.shape == (18, 19)
        assert np.all(np.diff(bounds, axis=1) >= 0.0)
        assert np.all(np.isposinf(bounds[:, -1]))

    def test_absorbing_default_row(self, matrix):
        assert thresholds(matrix).C[0, 0] > 7.0

    def test_thresholds_invert_cumulative_sums(self, matrix):
        table = thresholds(matrix)
        assert np.allclose(special.ndtr(table.C[:, :-1]), table.cumulative, rtol=0.0, atol=1e-9)

    def test_frame(self, matrix):
        frame = thresholds(matrix).to_frame()
        assert frame.shape == (18, 18)
        assert frame.loc['Cs', 'D'] == pytest.approx(0.03686, abs=1e-5)


class TestConditionalMigration:

    @pytest.mark.parametrize('grade', [1, GRADE_BBB, 17])
    @pytest.mark.parametrize('rho', [0.01, 0.2, 0.9])
    def test_probabilities_sum_to_one(self, matrix, grade, rho):
        probs = conditional_migration(grade, np.linspace(-6.0, 6.0, 25), rho, thresholds(matrix))
        assert probs.shape == (25, 18)
        assert np.allclose(probs.sum(axis=1), 1.0, rtol=0.0, atol=1e-12)
        assert np.all(probs >= 0.0)

    def test_vanishing_correlation_recovers_row(self, matrix):
        probs = conditional_migration(GRADE_BBB, 0.0, 1e-12, thresholds(matrix))
        assert np.allclose(probs, matrix.probs[GRADE_BBB], rtol=0.0, atol=1e-9)

    def test_factor_average_recovers_row(self, matrix):
        nodes, weights = hermegauss(120)
        weights = weights / math.sqrt(2.0 * math.pi)
        probs = conditional_migration(GRADE_BBB, nodes, 0.2, thresholds(matrix))
        assert np.allclose(weights @ probs, matrix.probs[GRADE_BBB], rtol=0.0, atol=1e-6)

    def test_default_probability_falls_with_factor(self, matrix):
        probs = conditional_migration(GRADE_BBB, np.linspace(-4.0, 4.0, 9), 0.3, thresholds(matrix))
        assert np.all(np.diff(probs[:, 0]) < 0.0)

    def test_rejects_correlation_outside_unit_interval(self, matrix):
        with pytest.raises(InvalidParameterError):
            conditional_migration(GRADE_BBB, 0.0, 1.0, thresholds(matrix))


class TestRiskNeutralCurve:

    TENORS = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0]

    def test_zero_sharpe_is_physical(self, matrix):
        curve = risk_neutral_default_curve(GRADE_BBB, matrix, 0.2, 0.0, self.TENORS)
        assert np.allclose(curve, matrix.cumulative_default(self.TENORS)[GRADE_BBB], rtol=1e-12, atol=1e-15)

    def test_risk_premium_raises_default_probabilities(self, matrix):
        physical = matrix.cumulative_default(self.TENORS)[GRADE_BBB]
        curve = risk_neutral_default_curve(GRADE_BBB, matrix, 0.2, 0.4, self.TENORS)
        assert np.all(curve[1:] > physical[1:])
        assert curve[0] == 0.0

    def test_monotone_for_every_grade(self, matrix):
        table = RiskNeutralCurve(matrix, 0.2, 0.4).table(np.linspace(0.0, 10.0, 41))
        assert np.all(np.diff(table, axis=1) >= 0.0)
        assert np.all(table[0] == 1.0)

    def test_default_free_grade(self):
        assert np.array_equal(risk_neutral_default_curve(1, SAFE, 0.2, 0.4, self.TENORS), np.zeros(7))


class TestBondPrices:

    def test_coupon_dates(self):
        assert np.allclose(coupon_dates(2.0, 0.5), [0.5, 1.0, 1.5, 2.0])

    def test_coupon_dates_off_grid(self):
        with pytest.raises(InvalidParameterError):
            coupon_dates(1.2, 0.5)

    def test_horizon_off_grid(self):
        with pytest.raises(InvalidParameterError):
            MtmMarketParams(horizon=1.0, accrual=0.3)

    def test_par_zero_coupon(self, matrix):
        ob = MtmObligor('O1', 1.0, 17, 0.45, 0.2, 0.0, 1.0)
        assert price_bond_t0(ob, _market(matrix)) == pytest.approx(1.0, abs=1e-15)

    def test_zero_lgd_prices_default_free(self, matrix):
        ob = MtmObligor('O1', 1.0, GRADE_BBB, 0.0, 0.2, 0.05, 3.0)
        dates = np.arange(1, 7) * 0.5
        expected = 0.025 * np.exp(-0.02 * dates).sum() + math.exp(-0.06)
        assert price_bond_t0(ob, _market(matrix, rate=0.02)) == pytest.approx(expected, rel=1e-12)

    def test_default_risk_lowers_price(self, matrix):
        mkt = _market(matrix, rate=0.02)
        risky = MtmObligor('O1', 1.0, GRADE_BBB, 0.45, 0.2, 0.05, 3.0)
        safe = MtmObligor('O2', 1.0, GRADE_BBB, 0.0, 0.2, 0.05, 3.0)
        assert price_bond_t0(risky, mkt) < price_bond_t0(safe, mkt)

    def test_default_state_without_lgd(self, matrix):
        ob = MtmObligor('O1', 1.0, GRADE_BBB, 0.45, 0.2, 0.05, 3.0)
        with pytest.raises(MissingLgdError):
            price_bond_tT(ob, _market(matrix), None, 0)

    def test_total_loss_without_coupons(self, matrix):
        ob = MtmObligor('O1', 1.0, GRADE_BBB, 0.45, 0.2, 0.0, 3.0)
        assert price_bond_tT(ob, _market(matrix), None, 0, realized_lgd=1.0) == 0.0

    def test_default_state_values(self, matrix):
        # coupon 0.1 paid semi-annually to year 2, r = 0: 0.05 received before T, F(T) = 1.15
        ob = MtmObligor('O1', 1.0, GRADE_BBB, 0.45, 0.2, 0.1, 2.0)
        mkt = _market(matrix)
        assert price_bond_tT(ob, mkt, None, 0, realized_lgd=0.5) == pytest.approx(0.625)
        assert price_bond_tT(ob, mkt, None, 0, expectation=True) == pytest.approx(0.05 + 0.55 * 1.15)

    def test_default_free_horizon_value(self):
        ob = MtmObligor('O1', 1.0, 1, 0.45, 0.2, 0.1, 2.0)
        r = 0.03
        expected = 0.05 * math.exp(r * 0.5) + 0.05 + 0.05 * math.exp(-r * 0.5) + 1.05 * math.exp(-r)
        assert price_bond_tT(ob, _market(SAFE, rate=r), None, 1) == pytest.approx(expected, rel=1e-12)

    def test_state_outside_matrix(self, matrix):
        ob = MtmObligor('O1', 1.0, GRADE_BBB, 0.45, 0.2, 0.05, 3.0)
        with pytest.raises(InvalidParameterError):
            price_bond_tT(ob, _market(matrix), None, 18)

    def test_maturity_before_horizon(self, matrix):
        ob = MtmObligor('O1', 1.0, GRADE_BBB, 0.45, 0.2, 0.05, 0.5)
        with pytest.raises(InvalidParameterError):
            price_bond_tT(ob, _market(matrix), None, 3)


class TestValuation:

    def test_value_bond(self, matrix):
        ob = MtmObligor('O1', 1.0, GRADE_BBB, 0.45, 0.2, 0.05, 5.0)
        mkt = _market(matrix, rate=0.02)
        bond = value_bond(ob, mkt)
        assert bond.p0 == pytest.approx(price_bond_t0(ob, mkt))
        assert np.allclose(bond.lambdas, bond.p_t / bond.p0)
        assert bond.p_t[GRADE_BBB] == pytest.approx(price_bond_tT(ob, mkt, None, GRADE_BBB))
        assert bond.default_return(ob.elgd) == pytest.approx(bond.lambdas[0])
        assert bond.lambdas[0] < bond.lambdas[1] < bond.lambdas[17]

    def test_portfolio_tables(self, mtm_portfolio, matrix):
        valuations = value_portfolio(mtm_portfolio, _market(matrix, rate=0.01))
        assert valuations.lambdas.shape == (4, 18)
        assert valuations.n_states == 17
        assert valuations.migration(np.zeros(7)).shape == (7, 4, 18)
        assert valuations.state_losses().shape == (4, 18)
        assert np.allclose(valuations.migration(-1.0).sum(axis=-1), 1.0)

    def test_obligor_means_match_enumeration(self, mtm_portfolio, matrix):
        valuations = value_portfolio(mtm_portfolio, _market(matrix))
        x = -1.3
        table = thresholds(matrix)
        for n, ob in enumerate(mtm_portfolio.obligors):
            probs = conditional_migration(ob.rating, x, ob.rho, table)
            expected = sum(probs[s] * valuations.bonds[n].p_t[s] for s in range(18)) / valuations.bonds[n].p0
            assert valuations.obligor_means(x)[n] == pytest.approx(expected, abs=1e-12)

    def test_identical_obligors_share_valuations(self, matrix):
        valuations = value_portfolio(homogeneous_mtm(3), _market(matrix))
        assert valuations.bonds[0] is valuations.bonds[2]

    def test_requires_mtm_portfolio(self, actuarial_portfolio, matrix):
        with pytest.raises(KindMismatchError):
            value_portfolio(actuarial_portfolio, _market(matrix))

    def test_discount_horizon(self):
        assert MtmMarketParams(yield_curve=YieldCurve.flat(0.05), matrix=SAFE).discount_horizon == pytest.approx(
            math.exp(-0.05))
