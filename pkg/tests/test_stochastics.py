"""
Tests for random streams, distributions, special functions, root finding
and weighted quantiles.
"""
import math

import numpy as np
import pytest
from scipy import integrate, special

from concentration_risk.errors import InvalidParameterError, NoSignChangeError
from concentration_risk.stochastics.distributions import (BetaLgdSpec, GammaFactorSpec, sample_beta_lgd,
                                                          sample_gamma, sample_lgd_matrix)
from concentration_risk.stochastics.quantiles import QUANTILE_RULES, effective_sample_size, weighted_quantile
from concentration_risk.stochastics.solvers import solve_monotone
from concentration_risk.stochastics.special import (gamma_cdf, gamma_quantile, normal_cdf, normal_pdf,
                                                    normal_quantile)
from concentration_risk.stochastics.streams import RandomStream, as_generator


class TestRandomStream:

    def test_same_seed_and_stream_reproduce(self):
        first = RandomStream(42, 3).generator().random(5)
        second = RandomStream(42, 3).generator().random(5)
        assert np.array_equal(first, second)

    def test_distinct_streams_differ(self):
        first = RandomStream(42, 3).generator().random(5)
        second = RandomStream(42, 4).generator().random(5)
        assert not np.array_equal(first, second)

    def test_substreams_differ_from_parent_and_each_other(self):
        parent = RandomStream(7, 1)
        draws = [s.generator().random(3) for s in (parent, parent.substream(0), parent.substream(1))]
        assert not np.array_equal(draws[0], draws[1])
        assert not np.array_equal(draws[1], draws[2])

    def test_substream_is_reproducible(self):
        parent = RandomStream(7, 1)
        assert np.array_equal(parent.substream(5).generator().random(4), parent.substream(5).generator().random(4))

    @pytest.mark.parametrize('seed', [-1, 2 ** 64])
    def test_seed_outside_64_bits_rejected(self, seed):
        with pytest.raises(InvalidParameterError):
            RandomStream(seed)

    def test_as_generator_passes_generators_through(self):
        generator = np.random.default_rng(1)
        assert as_generator(generator) is generator

    def test_as_generator_rejects_other_types(self):
        with pytest.raises(InvalidParameterError):
            as_generator(1234)


class TestGamma:

    def test_spec_moments(self):
        spec = GammaFactorSpec(0.25)
        assert spec.scale == pytest.approx(4.0)
        assert spec.variance == pytest.approx(4.0)

    def test_nonpositive_precision_rejected(self):
        with pytest.raises(InvalidParameterError):
            GammaFactorSpec(0.0)

    def test_sample_mean_and_variance(self):
        draws = sample_gamma(GammaFactorSpec(0.25), None, RandomStream(11), size=1_000_000)
        assert draws.mean() == pytest.approx(1.0, abs=0.01)
        assert draws.var() == pytest.approx(4.0, abs=0.1)

    def test_tilted_scale_mean(self):
        xi, t = 0.25, 0.1
        draws = sample_gamma(GammaFactorSpec(xi), 1.0 / (xi - t), RandomStream(12), size=1_000_000)
        assert draws.mean() == pytest.approx(xi / (xi - t), abs=0.02)

    def test_scalar_draw(self):
        assert isinstance(sample_gamma(GammaFactorSpec(2.0), None, RandomStream(1)), float)

    def test_nonpositive_scale_rejected(self):
        with pytest.raises(InvalidParameterError):
            sample_gamma(GammaFactorSpec(2.0), -1.0, RandomStream(1))

    def test_quantile_of_exponential(self):
        assert gamma_quantile(GammaFactorSpec(1.0), 0.999) == pytest.approx(-math.log(0.001), abs=1e-9)

    def test_median_matches_quadrature(self):
        spec = GammaFactorSpec(0.25)
        median = gamma_quantile(spec, 0.5)

        def density(x):
            return spec.xi ** spec.xi / math.gamma(spec.xi) * x ** (spec.xi - 1.0) * math.exp(-x * spec.xi)

        mass, _ = integrate.quad(density, 0.0, median, limit=200)
        assert mass == pytest.approx(0.5, abs=1e-6)

    def test_quantile_increasing(self):
        spec = GammaFactorSpec(0.25)
        levels = [0.9, 0.99, 0.999, 0.9999, 0.99999]
        values = [gamma_quantile(spec, q) for q in levels]
        assert all(b > a for a, b in zip(values, values[1:]))

    def test_quantile_inverts_cdf(self):
        spec = GammaFactorSpec(0.25)
        x_q = gamma_quantile(spec, 0.999)
        assert gamma_cdf(spec, x_q) == pytest.approx(0.999, abs=1e-10)

    @pytest.mark.parametrize('q', [0.0, 1.0, 1.5])
    def test_quantile_level_outside_unit_interval(self, q):
        with pytest.raises(InvalidParameterError):
            gamma_quantile(GammaFactorSpec(0.25), q)


class TestBetaLgd:

    @pytest.mark.parametrize('elgd, shapes', [(0.45, (1.35, 1.65)), (0.10, (0.30, 2.70))])
    def test_shapes(self, elgd, shapes):
        alpha, beta = BetaLgdSpec(elgd, 0.25).shapes
        assert alpha == pytest.approx(shapes[0])
        assert beta == pytest.approx(shapes[1])

    def test_sample_moments(self):
        spec = BetaLgdSpec(0.45, 0.25)
        draws = sample_beta_lgd(spec, RandomStream(3), size=500_000)
        assert draws.mean() == pytest.approx(0.45, abs=0.003)
        assert draws.var() == pytest.approx(spec.variance, rel=0.02)

    def test_zero_nu_is_deterministic(self):
        spec = BetaLgdSpec(0.5, 0.0)
        assert spec.is_degenerate
        assert np.all(sample_beta_lgd(spec, RandomStream(3), size=10) == 0.5)
        with pytest.raises(InvalidParameterError):
            spec.shapes

    @pytest.mark.parametrize('elgd', [0.0, 1.0])
    def test_boundary_elgd_is_deterministic(self, elgd):
        spec = BetaLgdSpec(elgd, 0.25)
        assert spec.is_degenerate
        assert spec.variance == 0.0
        assert np.all(sample_beta_lgd(spec, RandomStream(3), size=10) == elgd)
        with pytest.raises(InvalidParameterError):
            spec.shapes

    def test_elgd_outside_unit_interval(self):
        with pytest.raises(InvalidParameterError):
            BetaLgdSpec(1.2, 0.25)

    def test_small_nu_concentrates(self):
        draws = sample_beta_lgd(BetaLgdSpec(0.5, 1e-4), RandomStream(3), size=10_000)
        assert draws.mean() == pytest.approx(0.5, abs=1e-3)
        assert draws.var() < 1e-4

    def test_matrix_keeps_degenerate_columns(self):
        lgd = sample_lgd_matrix(np.array([0.0, 0.45, 1.0]), 0.25, np.random.default_rng(0), 100)
        assert lgd.shape == (100, 3)
        assert np.all(lgd[:, 0] == 0.0)
        assert np.all(lgd[:, 2] == 1.0)
        assert np.all((lgd[:, 1] >= 0.0) & (lgd[:, 1] <= 1.0))

    def test_invalid_nu_rejected(self):
        with pytest.raises(InvalidParameterError):
            BetaLgdSpec(0.45, 1.0)


class TestNormal:

    def test_cdf_symmetry(self):
        assert normal_cdf(0.0) == pytest.approx(0.5)

    def test_quantile(self):
        assert normal_quantile(0.999) == pytest.approx(3.090232306, abs=1e-8)

    def test_quantile_round_trip(self):
        p = np.array([1e-9, 0.001, 0.3, 0.5, 0.999])
        assert np.allclose(normal_cdf(normal_quantile(p)), p, rtol=1e-10, atol=0.0)

    def test_density_ratio(self):
        assert normal_pdf(1.0) / normal_pdf(0.0) == pytest.approx(math.exp(-0.5))

    @pytest.mark.parametrize('p', [0.0, 1.0, -0.1])
    def test_quantile_domain(self, p):
        with pytest.raises(InvalidParameterError):
            normal_quantile(p)


class TestSolveMonotone:

    def test_linear(self):
        assert solve_monotone(lambda x: x - 2.0, 0.0, 10.0) == pytest.approx(2.0, abs=1e-10)

    def test_exponential(self):
        assert solve_monotone(lambda x: math.expm1(x), -5.0, 5.0, tol=1e-14) == pytest.approx(0.0, abs=1e-12)

    def test_bracket_expands_to_the_root(self):
        assert solve_monotone(lambda x: x - 100.0, 0.0, 1.0) == pytest.approx(100.0, abs=1e-8)

    def test_decreasing_function(self):
        assert solve_monotone(lambda x: 3.0 - x, -1.0, 1.0) == pytest.approx(3.0, abs=1e-8)

    def test_no_sign_change(self):
        with pytest.raises(NoSignChangeError):
            solve_monotone(lambda x: x * x + 1.0, -1.0, 1.0, max_expansions=5)

    def test_limits_stop_expansion(self):
        with pytest.raises(NoSignChangeError):
            solve_monotone(lambda x: x - 100.0, 0.0, 1.0, limits=(0.0, 10.0))

    def test_empty_bracket(self):
        with pytest.raises(InvalidParameterError):
            solve_monotone(lambda x: x, 1.0, 1.0)


class TestWeightedQuantile:

    @pytest.fixture
    def losses(self):
        return np.random.default_rng(5).permutation(np.arange(1000, dtype=float))

    def test_plain(self, losses):
        assert weighted_quantile(losses, 0.9985) == 998.0

    @pytest.mark.parametrize('rule', QUANTILE_RULES)
    def test_rules_agree_for_unit_weights(self, losses, rule):
        assert weighted_quantile(losses, 0.9985, np.zeros(losses.size), rule) == 998.0

    def test_weights_move_the_quantile(self):
        losses = np.array([0.0, 1.0, 2.0, 3.0])
        # most of the mass sits on the largest loss
        log_weights = np.log(np.array([0.1, 0.1, 0.1, 3.7]))
        assert weighted_quantile(losses, 0.5, log_weights, 'normalized') == 3.0

    def test_default_accumulates_weights_up_to_q_times_k(self):
        losses = np.arange(10, dtype=float)
        log_weights = np.log(np.array([0.5] * 5 + [2.0] * 5))
        # running weights 0.5 .. 2.5, 4.5, 6.5 first reach q K = 5 at index 6
        assert weighted_quantile(losses, 0.5, log_weights) == 6.0
        assert weighted_quantile(losses, 0.5, log_weights, 'cumulative') == 6.0
        assert weighted_quantile(losses, 0.5, log_weights, 'tail') == 7.0

    def test_unknown_rule(self, losses):
        with pytest.raises(InvalidParameterError):
            weighted_quantile(losses, 0.9, np.zeros(losses.size), 'median')

    def test_empty_sample(self):
        with pytest.raises(InvalidParameterError):
            weighted_quantile(np.array([]), 0.9)

    def test_effective_sample_size(self):
        assert effective_sample_size(np.zeros(100)) == pytest.approx(100.0)
        assert effective_sample_size(np.log(np.array([1.0, 0.0, 0.0]) + 1e-300)) == pytest.approx(1.0)
        assert effective_sample_size(np.array([])) == 0.0

    def test_tilted_gamma_estimates_tail_probability(self):
        # exact tail of Gamma(xi, 1/xi) above its 0.999 quantile, estimated under the tilted law
        xi, t = 0.25, 0.2
        spec = GammaFactorSpec(xi)
        x_q = gamma_quantile(spec, 0.999)
        draws = sample_gamma(spec, 1.0 / (xi - t), RandomStream(9), size=200_000)
        log_weights = -t * draws - xi * math.log1p(-t / xi)
        estimate = float(np.mean(np.exp(log_weights) * (draws > x_q)))
        assert estimate == pytest.approx(1.0 - special.gammainc(xi, xi * x_q), rel=0.05)
