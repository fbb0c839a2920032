"""Single-query prediction from a saved classifier checkpoint."""

from typing import Optional

from ..models.checkpoint import ModelCheckpoint, build_model, load_checkpoint
from ..text.normalizer import normalize_text
from ..text.tokenizer import Vocabulary
from ..utils.errors import CheckpointError, ValidationError
from .batching import class_probabilities, encode_texts
from .metrics import THRESHOLD


class Predictor:
    """チェックポイントから組み立てた分類器（読み取り専用）。"""

    def __init__(self, checkpoint: ModelCheckpoint, strip_diacritics: bool = False):
        if checkpoint.arch == "encoder":
            raise CheckpointError(
                "事前学習のみのチェックポイントでは分類できません（finetuneが必要です）",
                {"arch": checkpoint.arch}
            )
        self.checkpoint = checkpoint
        self.model = build_model(checkpoint)
        self.vocab: Vocabulary = checkpoint.vocab
        self.max_len = checkpoint.max_len
        self.strip_diacritics = strip_diacritics

    @classmethod
    def from_file(cls, path: str, strip_diacritics: bool = False) -> "Predictor":
        return cls(load_checkpoint(path), strip_diacritics=strip_diacritics)

    def probability(self, query: str) -> float:
        """
        正規化したクエリのクラス1（誤字あり）確率。

        Raises:
            ValidationError: 正規化後のクエリが空の場合
        """
        text = normalize_text(query, strip_diacritics=self.strip_diacritics)
        if not text:
            raise ValidationError("正規化後のクエリが空のため判定できません", {"query": query})
        ids = encode_texts([text], self.vocab, self.max_len)
        return float(class_probabilities(self.model, ids)[0])

    def predict(self, query: str) -> tuple[bool, float]:
        probability = self.probability(query)
        return probability >= THRESHOLD, probability


def predict(checkpoint: ModelCheckpoint | str, query: str, strip_diacritics: Optional[bool] = None) -> tuple[bool, float]:
    """(誤字ありかどうか, クラス1の確率) を返す。"""
    if isinstance(checkpoint, str):
        checkpoint = load_checkpoint(checkpoint)
    return Predictor(checkpoint, strip_diacritics=bool(strip_diacritics)).predict(query)
