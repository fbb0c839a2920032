"""Pre-norm transformer encoder with learned positions.

Block: x + Attn(LN(x)) then x + FF(LN(x)), feed-forward with gelu. Keys at
PAD positions get an additive -1e9 before the softmax, so their attention
weight underflows to exactly zero. The encoder returns every layer's output
so heads can choose how to pool.

Dropout layer ids: embeddings 0, attention of layer l 2l+1, feed-forward of
layer l 2l+2.
"""

from typing import Optional

import numpy as np

from ..autodiff import ops
from ..autodiff.tensor import Tensor
from ..text.tokenizer import PAD_ID
from ..utils.errors import ShapeError, ValidationError
from .configs import EncoderConfig
from .params import Embedding, LayerNorm, Linear, Module


MASK_VALUE = -1e9


def attention(
    q: Tensor,
    k: Tensor,
    v: Tensor,
    additive_mask: Optional[np.ndarray] = None,
) -> tuple[Tensor, np.ndarray]:
    """
    スケール付き内積注意。q, k, vは (..., seq, d)。

    Returns:
        (出力 (..., seq, d), 注意の重み)
    """
    d = q.shape[-1]
    axes = tuple(range(k.ndim - 2)) + (k.ndim - 1, k.ndim - 2)
    scores = (q @ ops.transpose(k, axes)) * (1.0 / np.sqrt(d))
    if additive_mask is not None:
        scores = scores + additive_mask
    weights = ops.softmax(scores, axis=-1)
    return weights @ v, weights.data


class EncoderLayer(Module):
    """1層分の自己注意ブロックとフィードフォワードブロック。"""

    def __init__(self, config: EncoderConfig, rng: np.random.Generator):
        super().__init__()
        H, F = config.hidden_dim, config.ff_dim
        self.config = config
        self.ln_attn = self.add_module("ln_attn", LayerNorm(H))
        self.query = self.add_module("query", Linear(H, H, rng))
        self.key = self.add_module("key", Linear(H, H, rng))
        self.value = self.add_module("value", Linear(H, H, rng))
        self.attn_out = self.add_module("attn_out", Linear(H, H, rng))
        self.ln_ff = self.add_module("ln_ff", LayerNorm(H))
        self.ff_in = self.add_module("ff_in", Linear(H, F, rng))
        self.ff_out = self.add_module("ff_out", Linear(F, H, rng))
        self.last_attention: Optional[np.ndarray] = None

    def _split_heads(self, x: Tensor) -> Tensor:
        batch, seq_len, _ = x.shape
        c = self.config
        return ops.transpose(x.reshape(batch, seq_len, c.n_heads, c.head_dim), (0, 2, 1, 3))

    def attend(self, x: Tensor, additive_mask: np.ndarray) -> Tensor:
        batch, seq_len, hidden = x.shape
        h = self.ln_attn(x)
        q = self._split_heads(self.query(h))
        k = self._split_heads(self.key(h))
        v = self._split_heads(self.value(h))
        context, weights = attention(q, k, v, additive_mask)
        self.last_attention = weights
        merged = ops.transpose(context, (0, 2, 1, 3)).reshape(batch, seq_len, hidden)
        return self.attn_out(merged)

    def feed_forward(self, x: Tensor) -> Tensor:
        return self.ff_out(ops.gelu(self.ff_in(self.ln_ff(x))))

    def __call__(
        self,
        x: Tensor,
        additive_mask: np.ndarray,
        index: int,
        train: bool = False,
        step: int = 0,
        seed: int = 0,
    ) -> Tensor:
        p = self.config.dropout_p
        x = x + ops.dropout(self.attend(x, additive_mask), p, train, seed, 2 * index + 1, step)
        return x + ops.dropout(self.feed_forward(x), p, train, seed, 2 * index + 2, step)


class TransformerEncoder(Module):
    """トークン埋め込み + 位置埋め込み → n_layers個のブロック。"""

    def __init__(self, config: EncoderConfig, seed: int = 0):
        super().__init__()
        self.config = config
        rng = np.random.default_rng(seed)
        self.token_embedding = self.add_module(
            "token_embedding", Embedding(config.vocab_size, config.hidden_dim, rng)
        )
        self.position_embedding = self.add_module(
            "position_embedding", Embedding(config.max_len, config.hidden_dim, rng)
        )
        self.layers = [
            self.add_module(f"layers.{i}", EncoderLayer(config, rng)) for i in range(config.n_layers)
        ]

    def __call__(
        self,
        ids: np.ndarray,
        attention_mask: Optional[np.ndarray] = None,
        train: bool = False,
        step: int = 0,
        seed: int = 0,
    ) -> list[Tensor]:
        """
        全層の出力 [n_layers] × (batch, seq, hidden) を返す。

        Args:
            ids: (batch, seq) のid（CLS ... SEP PAD ...）
            attention_mask: 注意を向けてよいキー位置 (batch, seq)。Noneの場合はPAD以外
            train: ドロップアウトを有効にするかどうか
            step: ドロップアウトのステップ番号
            seed: ドロップアウトのシード

        Raises:
            ShapeError: 系列長がmax_lenを超える場合
            ValidationError: 注意を向けられるキーがない行がある場合
        """
        ids = np.asarray(ids)
        if ids.ndim != 2:
            raise ValidationError(f"idsは2次元である必要があります: shape={ids.shape}", {"shape": list(ids.shape)})
        seq_len = ids.shape[1]
        if seq_len > self.config.max_len:
            raise ShapeError(
                f"系列長がmax_lenを超えています: {seq_len} > {self.config.max_len}",
                {"seq_len": seq_len, "max_len": self.config.max_len}
            )
        keys = (ids != PAD_ID) if attention_mask is None else np.asarray(attention_mask, dtype=bool)
        if keys.shape != ids.shape:
            raise ShapeError(
                f"attention_maskの形状がidsと一致しません: {keys.shape} vs {ids.shape}",
                {"mask": list(keys.shape), "ids": list(ids.shape)}
            )
        if not keys.any(axis=1).all():
            raise ValidationError("注意を向けられるキーがない行があります")
        additive = np.where(keys, 0.0, MASK_VALUE)[:, None, None, :]

        x = self.token_embedding(ids) + self.position_embedding(np.arange(seq_len))
        x = ops.dropout(x, self.config.dropout_p, train, seed, 0, step)
        outputs: list[Tensor] = []
        for index, layer in enumerate(self.layers):
            x = layer(x, additive, index, train, step, seed)
            outputs.append(x)
        return outputs


def encode(ids: np.ndarray, encoder: TransformerEncoder, attention_mask: Optional[np.ndarray] = None) -> list[Tensor]:
    """評価モードで全層の出力を計算する。"""
    return encoder(ids, attention_mask=attention_mask, train=False)
