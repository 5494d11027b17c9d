"""
Tests for portfolio encoding, the rectifier network, its file format and training.
"""
import dataclasses
import json
import os

import numpy as np
import pytest

from concentration_risk.errors import (InvalidParameterError, KindMismatchError, ModelChecksumError, ModelFileError,
                                       ModelVersionError, TooManyObligorsError, WidthMismatchError)
from concentration_risk.neural import (Adam, EncodingMeta, MlpModel, TrainConfig, decode_actuarial, decode_mtm,
                                       encode_actuarial, encode_mtm, fit, forward, ga_neural, generate_labels,
                                       load_model, predict_ga, save_model, train)
from concentration_risk.neural.training import label_seed, split_indices
from concentration_risk.portfolio.models import ACTUARIAL, MTM
from concentration_risk.sampler import SamplerConfig

from conftest import homogeneous_actuarial

EPS = 1e-6


@pytest.fixture
def tiny_meta():
    return EncodingMeta.for_kind(ACTUARIAL, max_obligors=2)


@pytest.fixture
def tiny_model(tiny_meta):
    return MlpModel.initialize(tiny_meta, [8], np.random.default_rng(0))


def _scale_exposures(portfolio, factor):
    return portfolio.with_obligors([dataclasses.replace(o, exposure=o.exposure * factor)
                                    for o in portfolio.obligors])


class TestEncoding:

    def test_widths(self, matrix):
        assert EncodingMeta.for_kind(ACTUARIAL).width == 401
        assert EncodingMeta.for_kind(MTM, n_states=matrix.n_states).width == 601

    def test_mtm_needs_states(self):
        with pytest.raises(InvalidParameterError):
            EncodingMeta(MTM, blocks=('share',))

    def test_layout(self, actuarial_portfolio):
        meta = EncodingMeta.for_kind(ACTUARIAL, max_obligors=8)
        features = encode_actuarial(actuarial_portfolio, 0.002, meta)
        shares = np.sort(actuarial_portfolio.shares)[::-1]
        assert np.allclose(features[:5], shares)
        assert np.all(features[5:8] == 0.0)
        assert features[8] == 0.01
        assert features[24] == 0.8
        assert features.size == 33
        assert features[-1] == pytest.approx(0.02)

    def test_permutation_invariant(self, actuarial_portfolio):
        reversed_portfolio = actuarial_portfolio.with_obligors(actuarial_portfolio.obligors[::-1])
        assert np.array_equal(encode_actuarial(actuarial_portfolio, 0.01), encode_actuarial(reversed_portfolio, 0.01))

    def test_exposure_scale_invariant(self, actuarial_portfolio):
        scaled = _scale_exposures(actuarial_portfolio, 2.0)
        assert np.array_equal(encode_actuarial(actuarial_portfolio, 0.01), encode_actuarial(scaled, 0.01))

    def test_decode_actuarial(self, actuarial_portfolio):
        frame, ga1st = decode_actuarial(encode_actuarial(actuarial_portfolio, 0.003))
        assert len(frame) == 5
        assert list(frame.columns) == ['share', 'pd', 'elgd', 'omega']
        assert frame['pd'].iloc[0] == 0.01
        assert ga1st == pytest.approx(0.003)

    def test_decode_mtm(self, mtm_portfolio, matrix):
        meta = EncodingMeta.for_kind(MTM, max_obligors=10, n_states=matrix.n_states)
        frame, _ = decode_mtm(encode_mtm(mtm_portfolio, 0.001, meta), meta)
        assert sorted(frame['rating']) == sorted(mtm_portfolio.ratings)
        assert sorted(frame['maturity']) == sorted(mtm_portfolio.maturities)

    def test_width_mismatch(self, tiny_meta):
        with pytest.raises(WidthMismatchError):
            decode_actuarial(np.zeros(10), tiny_meta)

    def test_too_many_obligors(self, tiny_meta):
        with pytest.raises(TooManyObligorsError):
            encode_actuarial(homogeneous_actuarial(3), 0.0, tiny_meta)

    def test_kind_mismatch(self, mtm_portfolio):
        with pytest.raises(KindMismatchError):
            encode_actuarial(mtm_portfolio, 0.0)


class TestMlp:

    def test_shapes(self, tiny_model):
        assert tiny_model.layer_sizes == (9, 8, 1)
        assert tiny_model.weights[0].shape == (8, 9)
        assert tiny_model.n_parameters == 9 * 8 + 8 + 8 + 1

    def test_gradients_match_finite_differences(self, tiny_model):
        generator = np.random.default_rng(1)
        features = generator.uniform(size=(5, 9))
        targets = generator.uniform(size=5)
        _, grads = tiny_model.loss_and_gradients(features, targets)
        for parameter, grad in zip(tiny_model.parameters(), grads):
            assert grad.shape == parameter.shape
            flat, flat_grad = parameter.reshape(-1), grad.reshape(-1)
            for index in range(0, flat.size, 7):
                saved = flat[index]
                flat[index] = saved + EPS
                upper, _ = tiny_model.loss_and_gradients(features, targets)
                flat[index] = saved - EPS
                lower, _ = tiny_model.loss_and_gradients(features, targets)
                flat[index] = saved
                assert flat_grad[index] == pytest.approx((upper - lower) / (2.0 * EPS), rel=1e-4, abs=1e-8)

    def test_zero_weights_give_output_bias(self, tiny_model):
        for w in tiny_model.weights:
            w[...] = 0.0
        tiny_model.biases[-1][...] = 0.3
        assert forward(tiny_model, np.ones(9)) == pytest.approx(0.3)
        assert np.allclose(forward(tiny_model, np.ones((4, 9))), 0.3)

    def test_width_mismatch(self, tiny_model):
        with pytest.raises(WidthMismatchError):
            forward(tiny_model, np.ones(8))

    def test_layer_shape_mismatch(self, tiny_meta):
        with pytest.raises(InvalidParameterError):
            MlpModel((9, 1), [np.zeros((1, 8))], [np.zeros(1)], tiny_meta)

    def test_adam_rejects_learning_rate(self, tiny_model):
        with pytest.raises(InvalidParameterError):
            Adam(tiny_model.parameters(), learning_rate=0.0)

    def test_fit_constant_target(self, tiny_model):
        generator = np.random.default_rng(2)
        features = generator.uniform(size=(64, 9))
        targets = np.full(64, 0.5)
        cfg = TrainConfig(learning_rate=1e-2, batch_size=32, epochs=300, progress=False)
        history = fit(tiny_model, features, targets, cfg, generator)
        assert len(history) == 600
        assert list(history.columns) == ['iter', 'loss', 'label', 'pred']
        assert history['loss'].iloc[-1] < history['loss'].iloc[0]
        assert np.mean(forward(tiny_model, features)) == pytest.approx(0.5, abs=0.05)

    def test_fit_restores_best_checkpoint(self, tiny_model):
        generator = np.random.default_rng(3)
        features = generator.uniform(size=(16, 9))
        targets = np.full(16, 0.2)
        cfg = TrainConfig(learning_rate=1e-2, batch_size=4, epochs=5, checkpoint_every=2, progress=False)
        fit(tiny_model, features, targets, cfg, generator, features[:4], targets[:4])
        outputs, _ = tiny_model.forward_batch(features[:4])
        assert np.all(np.isfinite(outputs))


class TestPersistence:

    def test_round_trip_is_exact(self, tiny_model, tmp_path):
        path = str(tmp_path / 'models' / 'tiny.json')
        save_model(tiny_model, path)
        loaded = load_model(path, expected_kind=ACTUARIAL)
        assert loaded.layer_sizes == tiny_model.layer_sizes
        assert loaded.encoding_meta == tiny_model.encoding_meta
        for original, restored in zip(tiny_model.parameters(), loaded.parameters()):
            assert np.array_equal(original, restored)

    def _tamper(self, tiny_model, tmp_path, change):
        path = str(tmp_path / 'tiny.json')
        save_model(tiny_model, path)
        with open(path, encoding='utf-8') as f:
            document = json.load(f)
        change(document)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(document, f)
        return path

    def test_checksum_mismatch(self, tiny_model, tmp_path):
        path = self._tamper(tiny_model, tmp_path, lambda d: d['encoding_meta'].update(target_scale=5.0))
        with pytest.raises(ModelChecksumError):
            load_model(path)

    def test_unsupported_version(self, tiny_model, tmp_path):
        path = self._tamper(tiny_model, tmp_path, lambda d: d.update(version=2))
        with pytest.raises(ModelVersionError):
            load_model(path)

    def test_wrong_format(self, tiny_model, tmp_path):
        path = self._tamper(tiny_model, tmp_path, lambda d: d.update(format='other'))
        with pytest.raises(ModelFileError):
            load_model(path)

    def test_truncated(self, tiny_model, tmp_path):
        path = tmp_path / 'tiny.json'
        save_model(tiny_model, str(path))
        path.write_text(path.read_text(encoding='utf-8')[:100], encoding='utf-8')
        with pytest.raises(ModelChecksumError):
            load_model(str(path))

    def test_missing(self, tmp_path):
        with pytest.raises(ModelFileError):
            load_model(str(tmp_path / 'absent.json'))

    def test_kind_mismatch(self, tiny_model, tmp_path):
        path = str(tmp_path / 'tiny.json')
        save_model(tiny_model, path)
        with pytest.raises(KindMismatchError):
            load_model(path, expected_kind=MTM)


class TestInference:

    def test_prediction_uses_target_scale(self, engines):
        meta = EncodingMeta.for_kind(ACTUARIAL, max_obligors=4)
        model = MlpModel.initialize(meta, [3], np.random.default_rng(0))
        for w in model.weights:
            w[...] = 0.0
        model.biases[-1][...] = 0.05
        portfolio = homogeneous_actuarial(4)
        assert predict_ga(model, portfolio, engines) == pytest.approx(0.005)
        result = ga_neural(model, portfolio, engines)
        assert result.neural == pytest.approx(0.005)
        assert result.analytic == pytest.approx(engines.ga_analytic(portfolio))

    def test_kind_mismatch(self, tiny_model, mtm_portfolio, engines):
        with pytest.raises(KindMismatchError):
            predict_ga(tiny_model, mtm_portfolio, engines)


class TestTraining:

    @pytest.fixture
    def small(self, tmp_path):
        cfg = TrainConfig(n_iter=6, sims_per_label=500, hidden=(4,), batch_size=2, max_obligors=10,
                          label_cache_dir=str(tmp_path / 'labels'), history_path=str(tmp_path / 'history.csv'),
                          progress=False, seed=3)
        return cfg, SamplerConfig(n_min=3, n_max=5, max_obligors=10)

    def test_label_seed(self):
        assert label_seed(1, 2) == label_seed(1, 2)
        assert label_seed(1, 2) != label_seed(1, 3)
        assert label_seed(1, 2) != label_seed(1, 2, offset=1000003)

    def test_split_keeps_training_data(self):
        train_idx, valid_idx = split_indices(20, 0.05, np.random.default_rng(0))
        assert train_idx.size == 19 and valid_idx.size == 1
        assert split_indices(1, 0.05, np.random.default_rng(0))[0].size == 1

    def test_labels_are_cached(self, small, engines):
        cfg, sampler_cfg = small
        meta = EncodingMeta.for_kind(ACTUARIAL, cfg.max_obligors)
        first = generate_labels(ACTUARIAL, cfg, sampler_cfg, engines, meta)
        assert len(first) == 6
        assert first.features.shape == (6, 41)
        assert os.path.exists(os.path.join(cfg.label_cache_dir, 'label_000005.npz'))
        second = generate_labels(ACTUARIAL, cfg, sampler_cfg, engines, meta)
        assert np.array_equal(first.labels, second.labels)
        assert np.array_equal(first.features, second.features)

    def test_train(self, small, engines):
        cfg, sampler_cfg = small
        model = train(ACTUARIAL, cfg, sampler_cfg, engines)
        assert model.layer_sizes == (41, 4, 1)
        assert len(model.history) == 3
        assert os.path.exists(cfg.history_path)

    def test_sampler_larger_than_encoding(self, small, engines):
        cfg, _ = small
        with pytest.raises(TooManyObligorsError):
            train(ACTUARIAL, cfg, SamplerConfig(n_max=20, max_obligors=20), engines)
