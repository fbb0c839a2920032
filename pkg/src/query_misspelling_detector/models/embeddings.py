"""External word-embedding initialization for the LSTM stages."""

import numpy as np

from ..readers.embedding_reader import EmbeddingReader
from ..text.tokenizer import N_SPECIAL, PAD_ID, Vocabulary
from ..utils.errors import ConfigurationError
from ..utils.logging_config import get_logger
from .params import EMBEDDING_INIT_RANGE


logger = get_logger(__name__)

OOV_POLICIES = ("uniform", "zeros")


def load_external_embeddings(
    path: str,
    vocab: Vocabulary,
    freeze: bool = False,
    oov_policy: str = "uniform",
    seed: int = 0,
) -> tuple[np.ndarray, bool]:
    """
    語彙の各単語にファイルのベクトルを割り当てた埋め込み行列を作る。

    Args:
        path: `word v1 ... vd` 形式のファイル
        vocab: 単語語彙
        freeze: Trueの場合は学習で更新しない
        oov_policy: ファイルにない単語の初期化（"uniform": ±0.05の一様乱数, "zeros"）
        seed: oov_policyの乱数シード

    Returns:
        (埋め込み行列 (語彙サイズ, d), 学習可能かどうか)

    Raises:
        ParseError: 次元が行ごとに異なる場合
    """
    if oov_policy not in OOV_POLICIES:
        raise ConfigurationError(f"不明なOOVポリシーです: {oov_policy}", {"oov_policy": oov_policy})

    vectors, dim = EmbeddingReader().read_file(path, keep=set(vocab.tokens[N_SPECIAL:]))
    rng = np.random.default_rng(seed)
    if oov_policy == "uniform":
        weights = rng.uniform(-EMBEDDING_INIT_RANGE, EMBEDDING_INIT_RANGE, size=(len(vocab), dim))
    else:
        weights = np.zeros((len(vocab), dim))
    weights[PAD_ID] = 0.0

    found = 0
    for index, token in enumerate(vocab.tokens):
        if index >= N_SPECIAL and token in vectors:
            weights[index] = vectors[token]
            found += 1

    coverage = found / max(1, len(vocab) - N_SPECIAL)
    logger.info(f"外部埋め込みを割り当て: {found}/{len(vocab) - N_SPECIAL}語 (カバー率 {coverage:.1%}, 次元 {dim})")
    return weights, not freeze
