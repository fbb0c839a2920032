"""学習ループと予測のユニットテスト"""

import numpy as np
import pytest

from query_misspelling_detector.models import (
    EncoderClassifier,
    EncoderConfig,
    HeadConfig,
    LstmClassifier,
    LstmConfig,
    MaskedLanguageModel,
    checkpoint_from_model,
    write_checkpoint,
)
from query_misspelling_detector.text.tokenizer import build_subword_vocab, build_word_vocab
from query_misspelling_detector.training import (
    Predictor,
    TrainConfig,
    evaluate,
    predict,
    split_pretrain_dev,
    train,
)
from query_misspelling_detector.utils.errors import CheckpointError, ConfigurationError, ValidationError
from query_misspelling_detector.utils.models import LabeledExample


MAX_LEN = 8


def toy_examples(indices) -> list[LabeledExample]:
    rows = []
    for i in indices:
        rows.append(LabeledExample(f"bad w{i}", f"fixed w{i}", True))
        rows.append(LabeledExample(f"good w{i}", f"good w{i}", False))
    return rows


@pytest.fixture(scope="module")
def toy_data():
    train_set = toy_examples(range(8))
    dev_set = toy_examples(range(8, 12))
    return train_set, dev_set, build_word_vocab(train_set, 100)


def lstm_model(vocab, seed=0, trainable=True) -> LstmClassifier:
    config = LstmConfig(len(vocab), embed_dim=8, hidden_dim=8, max_len=MAX_LEN, embeddings_trainable=trainable)
    return LstmClassifier(config, seed=seed)


class TestTrainConfig:
    """学習設定"""

    def test_from_preset_with_overrides(self):
        config = TrainConfig.from_preset({"max_epochs": 4, "batch_size": 32, "lr": 3e-5}, "finetune", 7, lr=1e-3)
        assert (config.max_epochs, config.batch_size, config.lr, config.seed) == (4, 32, 1e-3, 7)

    def test_invalid_values(self):
        with pytest.raises(ConfigurationError):
            TrainConfig(0, 32, 1e-3)
        with pytest.raises(ConfigurationError):
            TrainConfig(1, 32, 1e-3, task="regression")


class TestLstmTraining:
    """LSTMの学習"""

    def test_learns_separable_token(self, toy_data):
        train_set, dev_set, vocab = toy_data
        model = lstm_model(vocab, seed=1)
        config = TrainConfig(max_epochs=20, batch_size=4, lr=0.05, seed=1, task="lstm")
        checkpoint, history = train(model, config, train_set, dev_set, vocab, MAX_LEN, "toy-lstm")
        assert len(history.records) == 20
        assert history.records[-1].train_loss < history.records[0].train_loss
        assert history.best.dev.macro_f1 >= 0.9
        assert evaluate(model, dev_set, vocab, MAX_LEN).macro_f1 == history.best.dev.macro_f1
        assert checkpoint.arch == "lstm"

    def test_same_seed_same_run(self, toy_data):
        train_set, dev_set, vocab = toy_data
        config = TrainConfig(max_epochs=3, batch_size=4, lr=0.01, seed=3, task="lstm")
        first, h1 = train(lstm_model(vocab, seed=3), config, train_set, dev_set, vocab, MAX_LEN)
        second, h2 = train(lstm_model(vocab, seed=3), config, train_set, dev_set, vocab, MAX_LEN)
        assert [r.train_loss for r in h1.records] == [r.train_loss for r in h2.records]
        for name in first.params:
            np.testing.assert_array_equal(first.params[name], second.params[name])

    def test_frozen_embeddings_do_not_move(self, toy_data):
        train_set, dev_set, vocab = toy_data
        model = lstm_model(vocab, seed=4, trainable=False)
        before = model.embedding.weight.data.copy()
        train(model, TrainConfig(2, 4, 0.01, task="lstm"), train_set, dev_set, vocab, MAX_LEN)
        np.testing.assert_array_equal(model.embedding.weight.data, before)
        assert model.embedding.weight.requires_grad

    def test_empty_dev_set(self, toy_data):
        train_set, _, vocab = toy_data
        with pytest.raises(ValidationError):
            train(lstm_model(vocab), TrainConfig(1, 4, 0.01, task="lstm"), train_set, [], vocab, MAX_LEN)

    def test_task_must_match_model(self, toy_data):
        train_set, dev_set, vocab = toy_data
        config = TrainConfig(1, 4, 0.01, task="mlm_pretrain")
        with pytest.raises(ConfigurationError):
            train(lstm_model(vocab), config, train_set, dev_set, vocab, MAX_LEN)


class TestEncoderTraining:
    """エンコーダの事前学習と微調整"""

    @pytest.fixture(scope="class")
    def subword(self, toy_data):
        train_set, dev_set, _ = toy_data
        return build_subword_vocab(train_set + dev_set, 40)

    def encoder_config(self, vocab) -> EncoderConfig:
        return EncoderConfig(len(vocab), n_layers=2, hidden_dim=8, n_heads=2, ff_dim=16, max_len=MAX_LEN)

    def test_pretrain_reports_dev_loss(self, toy_data, subword):
        train_set, _, _ = toy_data
        texts = [e.query for e in train_set]
        config = TrainConfig(2, 4, 1e-3, seed=5, task="mlm_pretrain", dev_fraction=0.25)
        checkpoint, history = train(
            MaskedLanguageModel(self.encoder_config(subword), seed=5), config, texts, [], subword, MAX_LEN
        )
        assert checkpoint.arch == "encoder"
        assert all(np.isfinite(r.dev_loss) for r in history.records)
        assert history.task == "mlm_pretrain"

    def test_finetune_with_frozen_encoder(self, toy_data, subword):
        train_set, dev_set, _ = toy_data
        model = EncoderClassifier(self.encoder_config(subword), HeadConfig(encoder_frozen=True), seed=6)
        before = {k: v for k, v in model.state_dict().items() if k.startswith("encoder.")}
        checkpoint, history = train(
            model, TrainConfig(2, 4, 1e-3, seed=6), train_set, dev_set, subword, MAX_LEN, "frozen"
        )
        for name, value in before.items():
            np.testing.assert_array_equal(checkpoint.params[name], value)
        assert history.model == "frozen"
        assert len(history.records) == 2

    def test_pretrain_dev_split(self):
        texts = [f"t{i}" for i in range(100)]
        train_texts, dev_texts = split_pretrain_dev(texts, 0.02, seed=1)
        assert len(dev_texts) == 2
        assert sorted(train_texts + dev_texts) == sorted(texts)
        assert split_pretrain_dev(texts, 0.02, seed=1) == (train_texts, dev_texts)


class TestPredictor:
    """チェックポイントからの予測"""

    @pytest.fixture(scope="class")
    def checkpoint_path(self, toy_data, tmp_path_factory):
        train_set, dev_set, vocab = toy_data
        checkpoint, _ = train(
            lstm_model(vocab, seed=1), TrainConfig(20, 4, 0.05, seed=1, task="lstm"),
            train_set, dev_set, vocab, MAX_LEN,
        )
        path = tmp_path_factory.mktemp("predict") / "lstm.npz"
        write_checkpoint(checkpoint, str(path))
        return str(path)

    def test_prediction_is_consistent(self, checkpoint_path):
        is_misspelt, probability = predict(checkpoint_path, "Bad W3!")
        assert 0.0 <= probability <= 1.0
        assert is_misspelt == (probability >= 0.5)

    def test_normalization_is_applied(self, checkpoint_path):
        predictor = Predictor.from_file(checkpoint_path)
        assert predictor.probability("BAD   w3") == predictor.probability("bad w3")

    def test_empty_query(self, checkpoint_path):
        with pytest.raises(ValidationError):
            Predictor.from_file(checkpoint_path).predict("?!")

    def test_pretrain_only_checkpoint(self, toy_data, tmp_path):
        train_set, _, _ = toy_data
        vocab = build_subword_vocab(train_set, 30)
        config = EncoderConfig(len(vocab), n_layers=1, hidden_dim=4, n_heads=2, ff_dim=4, max_len=MAX_LEN)
        checkpoint = checkpoint_from_model(MaskedLanguageModel(config), vocab)
        with pytest.raises(CheckpointError):
            Predictor(checkpoint)
