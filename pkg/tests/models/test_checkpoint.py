"""チェックポイントの保存・読み込みのユニットテスト"""

import json
import time

import numpy as np
import pytest

from query_misspelling_detector.models import (
    EncoderClassifier,
    EncoderConfig,
    HeadConfig,
    LstmClassifier,
    MaskedLanguageModel,
    build_model,
    load_checkpoint,
    load_encoder_weights,
    save_checkpoint,
)
from query_misspelling_detector.text.tokenizer import CLS_ID, SEP_ID, SPECIAL_TOKENS, Vocabulary
from query_misspelling_detector.utils.errors import CheckpointError, InputFileNotFoundError, ShapeError


IDS = np.array([[CLS_ID, 5, 6, SEP_ID], [CLS_ID, 7, SEP_ID, 0]])


class TestRoundTrip:
    """保存したモデルの復元"""

    def test_lstm(self, lstm_config, vocab, tmp_path):
        model = LstmClassifier(lstm_config, seed=1)
        path = str(tmp_path / "lstm.npz")
        save_checkpoint(model, vocab, path)
        checkpoint = load_checkpoint(path, vocab)
        assert checkpoint.arch == "lstm"
        assert checkpoint.vocab == vocab
        restored = build_model(checkpoint)
        np.testing.assert_array_equal(restored.logits(IDS).data, model.logits(IDS).data)

    def test_encoder_classifier(self, tiny_encoder, vocab, tmp_path):
        model = EncoderClassifier(tiny_encoder, HeadConfig("last_layer_cls", 0.2, True), seed=2)
        path = str(tmp_path / "out" / "clf.npz")
        save_checkpoint(model, vocab, path)
        restored = build_model(load_checkpoint(path))
        assert restored.head_config == model.head_config
        np.testing.assert_array_equal(restored.logits(IDS).data, model.logits(IDS).data)

    def test_restored_model_is_in_eval_mode(self, lstm_config, vocab, tmp_path):
        path = str(tmp_path / "lstm.npz")
        save_checkpoint(LstmClassifier(lstm_config), vocab, path)
        assert build_model(load_checkpoint(path)).training is False

    def test_same_model_same_bytes(self, lstm_config, vocab, tmp_path):
        model = LstmClassifier(lstm_config, seed=1)
        first, second = tmp_path / "a.npz", tmp_path / "b.npz"
        save_checkpoint(model, vocab, str(first))
        time.sleep(2.1)
        save_checkpoint(model, vocab, str(second))
        assert first.read_bytes() == second.read_bytes()


class TestLoadErrors:
    """読み込みの失敗"""

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFileNotFoundError):
            load_checkpoint(str(tmp_path / "missing.npz"))

    def test_truncated_file(self, lstm_config, vocab, tmp_path):
        path = tmp_path / "lstm.npz"
        save_checkpoint(LstmClassifier(lstm_config), vocab, str(path))
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(CheckpointError):
            load_checkpoint(str(path))

    def test_not_a_checkpoint(self, tmp_path):
        path = tmp_path / "plain.npz"
        with open(path, "wb") as f:
            np.savez(f, weight=np.zeros(3))
        with pytest.raises(CheckpointError):
            load_checkpoint(str(path))

    def test_vocabulary_mismatch(self, lstm_config, vocab, tmp_path):
        path = str(tmp_path / "lstm.npz")
        save_checkpoint(LstmClassifier(lstm_config), vocab, path)
        other = Vocabulary.from_tokens(SPECIAL_TOKENS + ("a", "b", "c", "d", "e"))
        with pytest.raises(CheckpointError):
            load_checkpoint(path, other)

    def test_tampered_vocabulary_tokens(self, lstm_config, vocab, tmp_path):
        path = tmp_path / "lstm.npz"
        save_checkpoint(LstmClassifier(lstm_config), vocab, str(path))
        with np.load(path, allow_pickle=False) as archive:
            arrays = {name: archive[name] for name in archive.files}
        meta = json.loads(arrays["__meta__"].tobytes().decode("utf-8"))
        meta["vocab_tokens"][-1] = "ponderos"
        arrays["__meta__"] = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
        with open(path, "wb") as f:
            np.savez(f, **arrays)
        with pytest.raises(CheckpointError):
            load_checkpoint(str(path))


class TestEncoderTransfer:
    """事前学習済みエンコーダの引き継ぎ"""

    def test_pretrained_encoder_is_copied(self, tiny_encoder, vocab, tmp_path):
        mlm = MaskedLanguageModel(tiny_encoder, seed=5)
        path = str(tmp_path / "mlm.npz")
        save_checkpoint(mlm, vocab, path)
        model = EncoderClassifier(tiny_encoder, HeadConfig(), seed=6)
        head_before = model.head.output.weight.data.copy()
        load_encoder_weights(model, load_checkpoint(path))
        for name, value in mlm.encoder.state_dict().items():
            np.testing.assert_array_equal(model.encoder.parameters()[name].data, value)
        np.testing.assert_array_equal(model.head.output.weight.data, head_before)

    def test_layer_count_mismatch(self, tiny_encoder, vocab, tmp_path):
        path = str(tmp_path / "mlm.npz")
        save_checkpoint(MaskedLanguageModel(tiny_encoder), vocab, path)
        deeper = EncoderConfig(**{**tiny_encoder.to_dict(), "n_layers": 4})
        with pytest.raises(ShapeError):
            load_encoder_weights(EncoderClassifier(deeper, HeadConfig()), load_checkpoint(path))

    def test_lstm_checkpoint_has_no_encoder(self, lstm_config, tiny_encoder, vocab, tmp_path):
        path = str(tmp_path / "lstm.npz")
        save_checkpoint(LstmClassifier(lstm_config), vocab, path)
        with pytest.raises(CheckpointError):
            load_encoder_weights(EncoderClassifier(tiny_encoder, HeadConfig()), load_checkpoint(path))
