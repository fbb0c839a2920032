"""Word-salad "general language" lines for the mixed pre-training corpus."""

from typing import Optional, Sequence

import numpy as np

from ..text.normalizer import normalize_text
from ..utils.errors import ConfigurationError
from ..utils.logging_config import get_logger
from .gazetteer import zipf_weights
from .resources import general_words


logger = get_logger(__name__)


def generate_general_text(
    n_lines: int,
    seed: int,
    words: Optional[Sequence[str]] = None,
    min_words: int = 3,
    max_words: int = 10,
    zipf_exponent: float = 1.0,
) -> list[str]:
    """
    頻度順の単語リストからZipf分布で単語を選び、正規化済みの行を生成する。

    Args:
        n_lines: 行数（0以上）
        seed: 乱数シード
        words: 頻度の高い順に並んだ単語（Noneの場合は同梱のgeneral_words.json）
        min_words: 1行あたりの最小単語数
        max_words: 1行あたりの最大単語数

    Returns:
        正規化済みテキストのリスト

    Raises:
        ConfigurationError: 行数や単語数の指定が不正な場合
    """
    if n_lines < 0:
        raise ConfigurationError("n_linesは0以上である必要があります", {"n_lines": n_lines})
    if not 1 <= min_words <= max_words:
        raise ConfigurationError(
            "1 <= min_words <= max_wordsである必要があります",
            {"min_words": min_words, "max_words": max_words}
        )
    vocabulary = list(words) if words is not None else general_words()
    if not vocabulary:
        raise ConfigurationError("単語リストが空です")

    probs = np.asarray(zipf_weights(len(vocabulary), zipf_exponent))
    rng = np.random.default_rng(seed)
    lines: list[str] = []
    for _ in range(n_lines):
        length = int(rng.integers(min_words, max_words + 1))
        picks = rng.choice(len(vocabulary), size=length, p=probs)
        lines.append(normalize_text(" ".join(vocabulary[int(i)] for i in picks)))

    logger.info(f"一般テキストを生成: {n_lines}行 (seed={seed})")
    return lines
