"""
Tests for the actuarial CreditRisk+ engine.
"""
import dataclasses

import numpy as np
import pytest

from concentration_risk.engines.crplus import (CrPlusParams, conditional_expected_loss, conditional_pd,
                                               ga_exact_actuarial, is_var, plain_var, simulate_loss_plain,
                                               solve_tilting)
from concentration_risk.errors import InvalidParameterError, KindMismatchError
from concentration_risk.portfolio.models import ACTUARIAL, ActuarialObligor, Portfolio
from concentration_risk.stochastics.streams import RandomStream

from conftest import FAST_SIMS, homogeneous_actuarial


def _two_obligors(nu=0.0):
    obligors = (ActuarialObligor('O1', 6.0, 0.01, 1.0, 0.5), ActuarialObligor('O2', 4.0, 0.01, 1.0, 0.5))
    return Portfolio(obligors, nu, ACTUARIAL)


@pytest.fixture
def params():
    return CrPlusParams(n_sims=FAST_SIMS, seed=5)


class TestConditionalPd:

    @pytest.mark.parametrize('pd, omega, x, expected', [
        (0.01, 0.5, 3.0, 0.02),
        (0.01, 0.0, 50.0, 0.01),
        (0.01, 1.0, 0.0, 0.0),
        (0.5147, 1.0, 3.0, 1.0),
    ])
    def test_values(self, pd, omega, x, expected):
        assert conditional_pd(pd, omega, x) == pytest.approx(expected)

    def test_vectorized(self):
        values = conditional_pd(np.array([0.01, 0.5]), np.array([1.0, 1.0]), np.array([2.0, 4.0]))
        assert np.allclose(values, [0.02, 1.0])

    def test_conditional_expected_loss(self, actuarial_portfolio):
        p = actuarial_portfolio
        expected = float(np.sum(p.shares * p.elgds * np.clip(p.pds * (1.0 + p.omegas * 4.0), 0.0, 1.0)))
        assert conditional_expected_loss(p, 5.0) == pytest.approx(expected, abs=1e-15)


class TestParams:

    def test_default_quantile_rule(self):
        assert CrPlusParams().quantile_rule == 'cumulative'

    @pytest.mark.parametrize('field, value', [('xi', 0.0), ('q', 1.0), ('n_sims', 0), ('quantile_rule', 'mid')])
    def test_invalid(self, field, value):
        with pytest.raises(InvalidParameterError):
            CrPlusParams(**{field: value})


class TestTilting:

    def test_factor_mean_moves_to_quantile(self, actuarial_portfolio):
        params = CrPlusParams()
        tilt = solve_tilting(actuarial_portfolio, params)
        assert not tilt.no_tilt
        assert tilt.tau > 0.0
        assert params.xi / (params.xi - tilt.t) == pytest.approx(params.factor_quantile, rel=1e-9)
        assert abs(tilt.residual) < 1e-10

    def test_no_factor_sensitivity(self):
        tilt = solve_tilting(homogeneous_actuarial(3, omega=0.0), CrPlusParams())
        assert tilt.no_tilt
        assert tilt.tau == 0.0 and tilt.t == 0.0

    def test_requires_actuarial_portfolio(self, mtm_portfolio):
        with pytest.raises(KindMismatchError):
            solve_tilting(mtm_portfolio, CrPlusParams())


class TestSimulation:

    def test_plain_mean_is_expected_loss(self, actuarial_portfolio):
        params = CrPlusParams(n_sims=200_000, seed=1)
        losses = simulate_loss_plain(actuarial_portfolio, params, RandomStream(1, 2))
        p = actuarial_portfolio
        assert losses.shape == (200_000,)
        assert np.all((losses >= 0.0) & (losses <= 1.0))
        assert losses.mean() == pytest.approx(float(np.sum(p.shares * p.elgds * p.pds)), rel=0.05)

    def test_certain_defaults(self):
        portfolio = homogeneous_actuarial(4, pd=1.0, elgd=0.4, omega=0.0, nu=0.0)
        params = CrPlusParams(n_sims=500)
        assert plain_var(portfolio, params)[0] == pytest.approx(0.4)
        estimate, samples = is_var(portfolio, params)
        assert estimate == pytest.approx(0.4)
        assert samples.diagnostics['no_tilt']

    def test_zero_pd(self, params):
        estimate, samples = is_var(homogeneous_actuarial(5, pd=0.0), params)
        assert estimate == 0.0
        assert np.all(samples.losses == 0.0)

    def test_two_obligor_quantile(self):
        # P(L = 1) = PD^2 (1 + omega^2 / xi) = 2e-4 < 1 - q < P(L >= 0.6) = 0.01
        portfolio = _two_obligors()
        params = CrPlusParams(n_sims=20_000, seed=3, quantile_rule='tail')
        estimate, samples = is_var(portfolio, params)
        assert estimate == pytest.approx(0.6)
        assert set(np.round(np.unique(samples.losses), 12)) <= {0.0, 0.4, 0.6, 1.0}
        joint = np.mean(samples.weights * np.isclose(samples.losses, 1.0))
        assert joint == pytest.approx(2e-4, rel=0.15)

    def test_weights_are_unbiased(self, actuarial_portfolio):
        _, samples = is_var(actuarial_portfolio, CrPlusParams(n_sims=50_000, seed=2))
        assert samples.weights.mean() == pytest.approx(1.0, rel=0.05)

    def test_reproducible(self, actuarial_portfolio, params):
        first = is_var(actuarial_portfolio, params)
        second = is_var(actuarial_portfolio, params)
        assert first[0] == second[0]
        assert np.array_equal(first[1].log_weights, second[1].log_weights)
        other = is_var(actuarial_portfolio, dataclasses.replace(params, seed=6))[1]
        assert not np.array_equal(first[1].losses, other.losses)

    def test_independent_of_threads(self, actuarial_portfolio):
        serial = CrPlusParams(n_sims=FAST_SIMS, block_size=500, seed=9)
        parallel = dataclasses.replace(serial, threads=3)
        assert np.array_equal(is_var(actuarial_portfolio, serial)[1].losses,
                              is_var(actuarial_portfolio, parallel)[1].losses)
        assert np.array_equal(plain_var(actuarial_portfolio, serial)[1].losses,
                              plain_var(actuarial_portfolio, parallel)[1].losses)

    def test_diagnostics(self, actuarial_portfolio, params):
        _, samples = is_var(actuarial_portfolio, params)
        assert set(samples.diagnostics) == {'tau', 't', 'no_tilt', 'clamped_fraction', 'clamping_active'}
        assert 0.0 < samples.effective_sample_size() <= FAST_SIMS


class TestExactGa:

    def test_result(self, actuarial_portfolio, params):
        result = ga_exact_actuarial(actuarial_portfolio, params)
        diagnostics = result.diagnostics
        assert result.model_kind == ACTUARIAL
        assert result.exact == pytest.approx(diagnostics['var'] - diagnostics['conditional_loss'], abs=1e-15)
        assert diagnostics['portfolio_sha256'] == actuarial_portfolio.digest()
        assert diagnostics['n_sims'] == FAST_SIMS
        assert diagnostics['factor_quantile'] == pytest.approx(params.factor_quantile)

    @pytest.mark.slow
    def test_concentration_raises_ga(self):
        params = CrPlusParams(n_sims=100_000, seed=4, quantile_rule='tail')
        spread = homogeneous_actuarial(50)
        concentrated = spread.with_obligors(
            [dataclasses.replace(o, exposure=1000.0 if i == 0 else 1.0) for i, o in enumerate(spread.obligors)])
        assert ga_exact_actuarial(concentrated, params).exact > ga_exact_actuarial(spread, params).exact


@pytest.mark.slow
def test_importance_sampling_matches_plain_monte_carlo():
    portfolio = homogeneous_actuarial(20, pd=0.02, omega=0.6)
    is_estimate, _ = is_var(portfolio, CrPlusParams(n_sims=200_000, seed=7, quantile_rule='tail'))
    plain_estimate, _ = plain_var(portfolio, CrPlusParams(n_sims=1_000_000, seed=7))
    assert is_estimate == pytest.approx(plain_estimate, rel=0.05)
