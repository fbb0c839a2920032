"""Fixed-length id matrices, PAD-column trimming and batched class probabilities."""

from typing import Iterator, Sequence

import numpy as np

from ..autodiff.tensor import no_grad
from ..models.params import Module
from ..text.tokenizer import PAD_ID, Vocabulary, encode
from ..utils.models import LabeledExample


EVAL_BATCH_SIZE = 256


def encode_texts(texts: Sequence[str], vocab: Vocabulary, max_len: int) -> np.ndarray:
    """テキスト列を (n, max_len) のid行列にする。"""
    if not texts:
        return np.zeros((0, max_len), dtype=np.int64)
    return np.array([encode(text, vocab, max_len) for text in texts], dtype=np.int64)


def encode_examples(
    examples: Sequence[LabeledExample],
    vocab: Vocabulary,
    max_len: int,
) -> tuple[np.ndarray, np.ndarray]:
    """(id行列, ラベル（1=誤字あり, 0=正しい）) を返す。"""
    ids = encode_texts([e.query for e in examples], vocab, max_len)
    labels = np.array([int(e.is_misspelt) for e in examples], dtype=np.int64)
    return ids, labels


def trim_padding(ids: np.ndarray) -> np.ndarray:
    """バッチ内のすべての行でPADになっている末尾の列を取り除く。"""
    used = np.flatnonzero((ids != PAD_ID).any(axis=0))
    if used.size == 0:
        return ids
    return ids[:, : used[-1] + 1]


def batch_slices(n: int, batch_size: int) -> Iterator[slice]:
    for start in range(0, n, batch_size):
        yield slice(start, min(start + batch_size, n))


def class_probabilities(
    model: Module,
    ids: np.ndarray,
    batch_size: int = EVAL_BATCH_SIZE,
) -> np.ndarray:
    """評価モードでクラス1（誤字あり）のソフトマックス確率を計算する。"""
    was_training = model.training
    model.eval()
    probabilities: list[np.ndarray] = []
    try:
        with no_grad():
            for part in batch_slices(len(ids), batch_size):
                logits = model.logits(trim_padding(ids[part])).data
                shifted = logits - logits.max(axis=1, keepdims=True)
                exp = np.exp(shifted)
                probabilities.append(exp[:, 1] / exp.sum(axis=1))
    finally:
        model.train(was_training)
    return np.concatenate(probabilities) if probabilities else np.zeros(0)
