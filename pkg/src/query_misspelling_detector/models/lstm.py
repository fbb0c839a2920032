"""Single-direction LSTM classifier with a linear output layer."""

from typing import Optional

import numpy as np

from ..autodiff import ops
from ..autodiff.tensor import Tensor
from ..text.tokenizer import PAD_ID
from ..utils.errors import ValidationError
from .configs import LstmConfig
from .params import Embedding, Linear, Module, xavier_uniform


N_CLASSES = 2


def pad_mask(ids: np.ndarray) -> np.ndarray:
    """
    非PAD位置のマスク (batch, seq)。

    Raises:
        ValidationError: PADだけの行がある場合
    """
    ids = np.asarray(ids)
    if ids.ndim != 2:
        raise ValidationError(f"idsは2次元である必要があります: shape={ids.shape}", {"shape": list(ids.shape)})
    mask = ids != PAD_ID
    empty = np.flatnonzero(~mask.any(axis=1))
    if empty.size:
        raise ValidationError(
            f"PADだけの入力があります（行: {empty[:5].tolist()}）",
            {"rows": empty.tolist()}
        )
    return mask


class LstmCell(Module):
    """ゲート順序は i, f, g, o。"""

    def __init__(self, input_dim: int, hidden_dim: int, rng: np.random.Generator):
        super().__init__()
        self.hidden_dim = hidden_dim
        self.w_x = self.add_param("w_x", xavier_uniform(rng, input_dim, 4 * hidden_dim))
        self.w_h = self.add_param("w_h", xavier_uniform(rng, hidden_dim, 4 * hidden_dim))
        self.bias = self.add_param("bias", np.zeros(4 * hidden_dim))

    def step(self, x_proj: Tensor, h: Tensor, c: Tensor) -> tuple[Tensor, Tensor]:
        """x_projは入力側の射影 x W_x + b（系列全体でまとめて計算済み）。"""
        H = self.hidden_dim
        z = x_proj + h @ self.w_h
        i = ops.sigmoid(z[:, :H])
        f = ops.sigmoid(z[:, H:2 * H])
        g = ops.tanh(z[:, 2 * H:3 * H])
        o = ops.sigmoid(z[:, 3 * H:])
        c_new = f * c + i * g
        h_new = o * ops.tanh(c_new)
        return h_new, c_new

    def run(self, x: Tensor, mask: np.ndarray) -> Tensor:
        """
        系列を走査し、各行の最後の非PAD位置の隠れ状態を返す。

        PAD位置では状態を更新しない。
        """
        batch, seq_len = mask.shape
        projected = x @ self.w_x + self.bias
        h = Tensor(np.zeros((batch, self.hidden_dim)))
        c = Tensor(np.zeros((batch, self.hidden_dim)))
        for t in range(seq_len):
            h_new, c_new = self.step(projected[:, t, :], h, c)
            keep = mask[:, t:t + 1].astype(np.float64)
            h = h_new * keep + h * (1.0 - keep)
            c = c_new * keep + c * (1.0 - keep)
        return h


class LstmClassifier(Module):
    """埋め込み → LSTM → 最後の非PAD隠れ状態 → linear(hidden → 2)。"""

    arch = "lstm"

    def __init__(
        self,
        config: LstmConfig,
        seed: int = 0,
        embedding_weights: Optional[np.ndarray] = None,
    ):
        """
        Args:
            config: LSTMの設定
            seed: パラメータ初期化の乱数シード
            embedding_weights: 外部埋め込み (vocab_size, embed_dim)（Noneの場合は一様乱数で初期化）
        """
        super().__init__()
        self.config = config
        rng = np.random.default_rng(seed)
        self.embedding = self.add_module("embedding", Embedding(config.vocab_size, config.embed_dim, rng))
        if embedding_weights is not None:
            if embedding_weights.shape != (config.vocab_size, config.embed_dim):
                raise ValidationError(
                    f"埋め込みの形状が設定と一致しません: {embedding_weights.shape}",
                    {"shape": list(embedding_weights.shape), "expected": [config.vocab_size, config.embed_dim]}
                )
            self.embedding.weight.data = np.array(embedding_weights, dtype=np.float64)
        self.cell = self.add_module("cell", LstmCell(config.embed_dim, config.hidden_dim, rng))
        self.output = self.add_module("output", Linear(config.hidden_dim, N_CLASSES, rng))

    def trainable_parameters(self) -> dict[str, Tensor]:
        params = self.parameters()
        if not self.config.embeddings_trainable:
            params = {name: p for name, p in params.items() if not name.startswith("embedding.")}
        return params

    def logits(self, ids: np.ndarray, train: bool = False, step: int = 0, seed: int = 0) -> Tensor:
        """学習ループ共通のインターフェース（LSTMにはドロップアウトがない）。"""
        return self.classify(ids)

    def classify(self, ids: np.ndarray) -> Tensor:
        """ロジット (batch, 2) を返す。"""
        mask = pad_mask(ids)
        x = self.embedding(np.asarray(ids))
        return self.output(self.cell.run(x, mask))


def lstm_classify(ids: np.ndarray, model: LstmClassifier) -> Tensor:
    return model.classify(ids)
