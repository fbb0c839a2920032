"""Transformerエンコーダと分類・MLMヘッドのユニットテスト"""

import numpy as np
import pytest

from query_misspelling_detector.autodiff import Tensor, check_gradients, ops
from query_misspelling_detector.autodiff.ops import IGNORE_ID
from query_misspelling_detector.models import (
    ClassifyHead,
    EncoderClassifier,
    EncoderConfig,
    HeadConfig,
    MaskedLanguageModel,
    TransformerEncoder,
    attention,
    encode,
    mlm_mask,
)
from query_misspelling_detector.text.tokenizer import CLS_ID, MASK_ID, SEP_ID
from query_misspelling_detector.utils.errors import ConfigurationError, NothingToMaskError, ShapeError


class TestTransformerEncoder:
    """エンコーダ本体"""

    def test_outputs_every_layer(self, tiny_encoder):
        outputs = encode(np.array([[CLS_ID, 5, 6, SEP_ID]]), TransformerEncoder(tiny_encoder, seed=1))
        assert len(outputs) == 2
        assert all(h.shape == (1, 4, 8) for h in outputs)

    def test_pad_keys_are_ignored(self, tiny_encoder):
        encoder = TransformerEncoder(tiny_encoder, seed=1)
        short = encode(np.array([[CLS_ID, 5, 6, SEP_ID]]), encoder)[-1]
        padded = encode(np.array([[CLS_ID, 5, 6, SEP_ID, 0, 0]]), encoder)[-1]
        np.testing.assert_allclose(short.data, padded.data[:, :4, :], atol=1e-10)

    def test_pad_positions_get_zero_attention(self, tiny_encoder):
        encoder = TransformerEncoder(tiny_encoder, seed=1)
        encode(np.array([[CLS_ID, 5, SEP_ID, 0, 0]]), encoder)
        weights = encoder.layers[0].last_attention
        assert np.all(weights[..., 3:] == 0.0)

    def test_too_long_sequence(self, tiny_encoder):
        with pytest.raises(ShapeError):
            encode(np.full((1, 9), 5), TransformerEncoder(tiny_encoder))

    def test_dropout_is_deterministic_per_step(self, tiny_encoder):
        encoder = TransformerEncoder(tiny_encoder, seed=1)
        ids = np.array([[CLS_ID, 5, 6, SEP_ID]])
        a = encoder(ids, train=True, step=3, seed=9)[-1].data
        b = encoder(ids, train=True, step=3, seed=9)[-1].data
        c = encoder(ids, train=True, step=4, seed=9)[-1].data
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_attention_weights_sum_to_one(self):
        rng = np.random.default_rng(0)
        q, k, v = (Tensor(rng.normal(size=(2, 3, 4))) for _ in range(3))
        out, weights = attention(q, k, v)
        assert out.shape == (2, 3, 4)
        np.testing.assert_allclose(weights.sum(axis=-1), 1.0)

    def test_invalid_head_split(self, vocab):
        with pytest.raises(ConfigurationError):
            EncoderConfig(vocab_size=len(vocab), hidden_dim=10, n_heads=3)

    def test_gradients_match_finite_differences(self, vocab):
        config = EncoderConfig(vocab_size=len(vocab), n_layers=1, hidden_dim=4, n_heads=2, ff_dim=6, max_len=5,
                               dropout_p=0.0)
        model = EncoderClassifier(config, HeadConfig(dropout_p=0.0), seed=2)
        ids = np.array([[CLS_ID, 5, 6, SEP_ID, 0], [CLS_ID, 7, SEP_ID, 0, 0]])
        targets = np.array([1, 0])

        def loss_fn():
            return ops.cross_entropy(model.logits(ids), targets)

        params = {name: p for name, p in model.parameters().items() if "embedding" not in name}
        result = check_gradients(loss_fn, params, probes=6, seed=1)
        assert result.passed(1e-4), result.max_rel_error


class TestClassifyHead:
    """分類ヘッド"""

    def test_logits_shape(self, tiny_encoder, head_config):
        model = EncoderClassifier(tiny_encoder, head_config, seed=1)
        assert model.logits(np.array([[CLS_ID, 5, SEP_ID], [CLS_ID, 6, SEP_ID]])).shape == (2, 2)

    def test_average_pooling_of_identical_layers(self):
        rng = np.random.default_rng(0)
        hidden = Tensor(rng.normal(size=(2, 3, 4)))
        last = ClassifyHead(4, HeadConfig("last_layer_cls"), np.random.default_rng(1))
        average = ClassifyHead(4, HeadConfig("avg_last4_cls"), np.random.default_rng(1))
        np.testing.assert_allclose(last.pool([hidden]).data, average.pool([hidden] * 4).data)

    def test_average_pooling_needs_four_layers(self, tiny_encoder):
        with pytest.raises(ConfigurationError):
            EncoderClassifier(tiny_encoder, HeadConfig("avg_last4_cls"))

    def test_unknown_pooling(self):
        with pytest.raises(ConfigurationError):
            HeadConfig("max_pool")

    def test_frozen_encoder_is_not_trainable(self, tiny_encoder):
        model = EncoderClassifier(tiny_encoder, HeadConfig(encoder_frozen=True))
        assert set(model.trainable_parameters()) == {"head.output.weight", "head.output.bias"}

    def test_unfrozen_encoder_is_trainable(self, tiny_encoder, head_config):
        model = EncoderClassifier(tiny_encoder, head_config)
        assert set(model.trainable_parameters()) == set(model.parameters())

    def test_two_layer_gradients_include_embeddings(self, tiny_encoder):
        model = EncoderClassifier(tiny_encoder, HeadConfig(dropout_p=0.0), seed=5)
        ids = np.array([[CLS_ID, 5, 6, SEP_ID, 0], [CLS_ID, 7, 8, 9, SEP_ID]])
        targets = np.array([0, 1])

        def loss_fn():
            return ops.cross_entropy(model.logits(ids), targets)

        params = model.parameters()
        assert any("embedding" in name for name in params)
        result = check_gradients(loss_fn, params, probes=5, seed=6)
        assert result.passed(1e-4), result.max_rel_error


class TestMlm:
    """マスク言語モデル"""

    def test_mask_count_and_positions(self):
        ids = np.array([CLS_ID] + list(range(5, 15)) + [SEP_ID])
        corrupted, targets = mlm_mask(ids, vocab_size=20, seed=0)
        selected = np.flatnonzero(targets != IGNORE_ID)
        assert selected.size == 2
        assert targets[0] == IGNORE_ID and targets[-1] == IGNORE_ID
        np.testing.assert_array_equal(targets[selected], ids[selected])
        unselected = np.setdiff1d(np.arange(ids.size), selected)
        np.testing.assert_array_equal(corrupted[unselected], ids[unselected])

    def test_at_least_one_position(self):
        _, targets = mlm_mask(np.array([CLS_ID, 5, SEP_ID]), vocab_size=10, seed=0)
        assert np.count_nonzero(targets != IGNORE_ID) == 1

    def test_mostly_mask_token(self):
        rng = np.random.default_rng(0)
        ids = np.array([CLS_ID] + [7] * 20 + [SEP_ID])
        masked = total = 0
        for _ in range(200):
            corrupted, targets = mlm_mask(ids, vocab_size=50, seed=rng)
            selected = targets != IGNORE_ID
            masked += np.count_nonzero(corrupted[selected] == MASK_ID)
            total += np.count_nonzero(selected)
        assert 0.7 < masked / total < 0.9

    def test_nothing_to_mask(self):
        with pytest.raises(NothingToMaskError):
            mlm_mask(np.array([CLS_ID, SEP_ID, 0]), vocab_size=10, seed=0)

    def test_loss_is_finite(self, tiny_encoder):
        model = MaskedLanguageModel(tiny_encoder, seed=1)
        ids = np.array([[CLS_ID, 5, 6, 7, SEP_ID]])
        corrupted, targets = mlm_mask(ids[0], tiny_encoder.vocab_size, seed=3)
        loss = model.loss(corrupted[None, :], targets[None, :])
        assert np.isfinite(loss.item())
        assert loss.item() > 0.0

    def test_loss_gradients_match_finite_differences(self, tiny_encoder):
        model = MaskedLanguageModel(tiny_encoder, seed=3)
        corrupted = np.array([[CLS_ID, 5, MASK_ID, 7, SEP_ID, 0], [CLS_ID, MASK_ID, 9, SEP_ID, 0, 0]])
        targets = np.full(corrupted.shape, IGNORE_ID)
        targets[0, 2] = 6
        targets[1, 1] = 8

        def loss_fn():
            return model.loss(corrupted, targets)

        result = check_gradients(loss_fn, model.parameters(), probes=5, seed=4)
        assert result.passed(1e-4), result.max_rel_error
