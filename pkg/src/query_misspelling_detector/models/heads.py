"""Classification and masked-language-model heads on top of the encoder."""

from typing import Optional, Sequence

import numpy as np

from ..autodiff import ops
from ..autodiff.ops import IGNORE_ID
from ..autodiff.tensor import Tensor
from ..text.tokenizer import MASK_ID, N_SPECIAL
from ..utils.errors import ConfigurationError, NothingToMaskError
from .configs import AVG_POOL_LAYERS, EncoderConfig, HeadConfig
from .encoder import TransformerEncoder
from .lstm import N_CLASSES
from .params import LayerNorm, Linear, Module


HEAD_DROPOUT_LAYER_ID = 1000
MLM_MASK_RATE = 0.15


class ClassifyHead(Module):
    """CLSベクトルをプールし、dropout → linear(hidden → 2)。"""

    def __init__(self, hidden_dim: int, config: HeadConfig, rng: np.random.Generator):
        super().__init__()
        self.config = config
        self.output = self.add_module("output", Linear(hidden_dim, N_CLASSES, rng))

    def pool(self, hidden_states: Sequence[Tensor]) -> Tensor:
        if self.config.pooling == "last_layer_cls":
            return hidden_states[-1][:, 0, :]
        if len(hidden_states) < AVG_POOL_LAYERS:
            raise ConfigurationError(
                f"avg_last4_clsには{AVG_POOL_LAYERS}層以上の出力が必要です",
                {"n_layers": len(hidden_states)}
            )
        cls_vectors = [h[:, 0, :] for h in hidden_states[-AVG_POOL_LAYERS:]]
        return ops.mean(ops.stack(cls_vectors, axis=0), axis=0)

    def __call__(
        self,
        hidden_states: Sequence[Tensor],
        train: bool = False,
        step: int = 0,
        seed: int = 0,
    ) -> Tensor:
        pooled = self.pool(hidden_states)
        pooled = ops.dropout(pooled, self.config.dropout_p, train, seed, HEAD_DROPOUT_LAYER_ID, step)
        return self.output(pooled)


def classify_head(
    hidden_states: Sequence[Tensor],
    head: ClassifyHead,
    train: bool = False,
    step: int = 0,
    seed: int = 0,
) -> Tensor:
    return head(hidden_states, train=train, step=step, seed=seed)


class MlmHead(Module):
    """layer norm + 出力行列（埋め込みとは共有しない）。"""

    def __init__(self, hidden_dim: int, vocab_size: int, rng: np.random.Generator):
        super().__init__()
        self.norm = self.add_module("norm", LayerNorm(hidden_dim))
        self.output = self.add_module("output", Linear(hidden_dim, vocab_size, rng))

    def __call__(self, hidden: Tensor) -> Tensor:
        return self.output(self.norm(hidden))


def mlm_mask(
    ids: np.ndarray,
    vocab_size: int,
    seed: int | np.random.Generator,
    mask_rate: float = MLM_MASK_RATE,
) -> tuple[np.ndarray, np.ndarray]:
    """
    1系列の一部をマスクする。

    特殊トークン以外の位置から round(mask_rate·n)（最低1）個を選び、
    80%をMASK、10%をランダムなトークン、10%をそのままにする。

    Returns:
        (破損させたid, ターゲット（選ばなかった位置はIGNORE_ID）)

    Raises:
        NothingToMaskError: マスクできるトークンがない場合（その例をスキップする合図）
    """
    ids = np.asarray(ids)
    maskable = np.flatnonzero(ids >= N_SPECIAL)
    if maskable.size == 0:
        raise NothingToMaskError("マスクできるトークンがありません")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    n_selected = max(1, int(np.floor(mask_rate * maskable.size + 0.5)))
    selected = np.sort(rng.choice(maskable, size=n_selected, replace=False))
    corrupted = ids.copy()
    targets = np.full(ids.shape, IGNORE_ID, dtype=np.int64)
    targets[selected] = ids[selected]
    for position in selected:
        r = rng.random()
        if r < 0.8:
            corrupted[position] = MASK_ID
        elif r < 0.9 and vocab_size > N_SPECIAL:
            corrupted[position] = int(rng.integers(N_SPECIAL, vocab_size))
    return corrupted, targets


class EncoderClassifier(Module):
    """エンコーダ + 分類ヘッド。encoder_frozenの場合はエンコーダを更新しない。"""

    arch = "encoder+head"

    def __init__(self, encoder_config: EncoderConfig, head_config: HeadConfig, seed: int = 0):
        super().__init__()
        head_config.validate_for(encoder_config.n_layers)
        self.encoder_config = encoder_config
        self.head_config = head_config
        self.encoder = self.add_module("encoder", TransformerEncoder(encoder_config, seed))
        rng = np.random.default_rng([seed, HEAD_DROPOUT_LAYER_ID])
        self.head = self.add_module("head", ClassifyHead(encoder_config.hidden_dim, head_config, rng))

    def trainable_parameters(self) -> dict[str, Tensor]:
        params = self.parameters()
        if self.head_config.encoder_frozen:
            params = {name: p for name, p in params.items() if not name.startswith("encoder.")}
        return params

    def logits(self, ids: np.ndarray, train: bool = False, step: int = 0, seed: int = 0) -> Tensor:
        hidden_states = self.encoder(ids, train=train, step=step, seed=seed)
        return self.head(hidden_states, train=train, step=step, seed=seed)


class MaskedLanguageModel(Module):
    """事前学習用のエンコーダ + MLMヘッド。"""

    arch = "encoder"

    def __init__(self, encoder_config: EncoderConfig, seed: int = 0):
        super().__init__()
        self.encoder_config = encoder_config
        self.encoder = self.add_module("encoder", TransformerEncoder(encoder_config, seed))
        rng = np.random.default_rng([seed, encoder_config.vocab_size])
        self.lm_head = self.add_module(
            "lm_head", MlmHead(encoder_config.hidden_dim, encoder_config.vocab_size, rng)
        )

    def loss(
        self,
        corrupted_ids: np.ndarray,
        target_ids: np.ndarray,
        train: bool = False,
        step: int = 0,
        seed: int = 0,
    ) -> Tensor:
        return mlm_loss(corrupted_ids, target_ids, self.encoder, self.lm_head, train, step, seed)


def mlm_loss(
    corrupted_ids: np.ndarray,
    target_ids: np.ndarray,
    encoder: TransformerEncoder,
    lm_head: MlmHead,
    train: bool = False,
    step: int = 0,
    seed: int = 0,
    attention_mask: Optional[np.ndarray] = None,
) -> Tensor:
    """
    選ばれた位置だけで語彙上のクロスエントロピーを計算する。

    Raises:
        UndefinedLossError: 選ばれた位置が1つもない場合
    """
    corrupted_ids = np.asarray(corrupted_ids)
    target_ids = np.asarray(target_ids)
    hidden = encoder(corrupted_ids, attention_mask=attention_mask, train=train, step=step, seed=seed)[-1]
    batch, seq_len, dim = hidden.shape
    flat_targets = target_ids.reshape(-1)
    rows = np.flatnonzero(flat_targets != IGNORE_ID)
    selected = hidden.reshape(batch * seq_len, dim)[rows]
    return ops.cross_entropy(lm_head(selected), flat_targets[rows])
