"""Precision, recall and F1 per class and macro-averaged, from confusion counts.

Label 1 is "misspelt", label 0 is "clean". A class with no gold examples has
undefined recall and F1; the report flags it and omits the macro average.
"""

from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from ..models.params import Module
from ..text.tokenizer import Vocabulary
from ..utils.errors import ValidationError
from ..utils.models import LabeledExample
from .batching import class_probabilities, encode_examples


THRESHOLD = 0.5
LABELS = ("1", "0")


def f1(precision: float, recall: float) -> float:
    """2PR / (P + R)。P = R = 0 の場合は0。"""
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ClassMetrics:
    """1クラス分の指標（recall/F1はクラスの正解例がない場合None）。"""

    label: str
    precision: float
    recall: Optional[float]
    f1: Optional[float]
    support: int

    def to_dict(self) -> dict[str, Any]:
        return {"Label": self.label, "Precision": self.precision, "Recall": self.recall, "F1": self.f1}


@dataclass(frozen=True)
class MetricsReport:
    """混同行列の各セルと、そこから計算したクラス別・マクロ平均の指標。"""

    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def n_examples(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.n_examples if self.n_examples else 0.0

    def _class(self, label: str) -> ClassMetrics:
        # クラス0は正例と負例を入れ替えて計算する
        tp, fp, fn = (self.tp, self.fp, self.fn) if label == "1" else (self.tn, self.fn, self.fp)
        precision = tp / (tp + fp) if tp + fp else 0.0
        if tp + fn == 0:
            return ClassMetrics(label, precision, None, None, 0)
        recall = tp / (tp + fn)
        return ClassMetrics(label, precision, recall, f1(precision, recall), tp + fn)

    @property
    def positive(self) -> ClassMetrics:
        return self._class("1")

    @property
    def negative(self) -> ClassMetrics:
        return self._class("0")

    @property
    def undefined_classes(self) -> list[str]:
        return [m.label for m in (self.positive, self.negative) if m.recall is None]

    @property
    def macro(self) -> Optional[ClassMetrics]:
        """クラスが1つしかない場合はNone。"""
        if self.undefined_classes:
            return None
        pos, neg = self.positive, self.negative
        return ClassMetrics(
            "Macro Avg",
            (pos.precision + neg.precision) / 2.0,
            (pos.recall + neg.recall) / 2.0,
            (pos.f1 + neg.f1) / 2.0,
            pos.support + neg.support,
        )

    @property
    def macro_f1(self) -> Optional[float]:
        macro = self.macro
        return macro.f1 if macro else None

    @property
    def f1_misspelt(self) -> Optional[float]:
        return self.positive.f1

    def rows(self) -> list[ClassMetrics]:
        rows = [self.positive, self.negative]
        if self.macro is not None:
            rows.append(self.macro)
        return rows

    def to_dict(self) -> dict[str, Any]:
        return {
            "rows": [row.to_dict() for row in self.rows()],
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "accuracy": self.accuracy,
            "support": {"1": self.positive.support, "0": self.negative.support},
            "undefined_classes": self.undefined_classes,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "MetricsReport":
        confusion = data["confusion"]
        return cls(tp=confusion["tp"], fp=confusion["fp"], fn=confusion["fn"], tn=confusion["tn"])

    def format_table(self) -> str:
        """Label / Precision / Recall / F1 の表（小数4桁）。"""
        lines = [f"{'Label':<10}{'Precision':>10}{'Recall':>10}{'F1':>10}"]
        for row in self.rows():
            values = [row.precision, row.recall, row.f1]
            cells = "".join(f"{v:>10.4f}" if v is not None else f"{'n/a':>10}" for v in values)
            lines.append(f"{row.label:<10}{cells}")
        return "\n".join(lines)


def confusion_counts(labels: Sequence[int], predictions: Sequence[int]) -> MetricsReport:
    labels = np.asarray(labels, dtype=bool)
    predictions = np.asarray(predictions, dtype=bool)
    return MetricsReport(
        tp=int(np.sum(labels & predictions)),
        fp=int(np.sum(~labels & predictions)),
        fn=int(np.sum(labels & ~predictions)),
        tn=int(np.sum(~labels & ~predictions)),
    )


def evaluate_predictions(
    labels: Sequence[int],
    probabilities: Sequence[float],
    threshold: float = THRESHOLD,
) -> MetricsReport:
    """
    クラス1の確率がthreshold以上なら誤字ありと予測して集計する。

    Raises:
        ValidationError: データが空、またはラベルと確率の数が一致しない場合
    """
    if len(labels) == 0:
        raise ValidationError("評価データが空です")
    if len(labels) != len(probabilities):
        raise ValidationError(
            "ラベルと確率の数が一致しません",
            {"labels": len(labels), "probabilities": len(probabilities)}
        )
    predictions = np.asarray(probabilities) >= threshold
    return confusion_counts(labels, predictions)


def evaluate(
    model: Module,
    examples: Sequence[LabeledExample],
    vocab: Vocabulary,
    max_len: int,
) -> MetricsReport:
    """データセット全体を評価モードで分類して集計する。"""
    if not examples:
        raise ValidationError("評価データが空です")
    ids, labels = encode_examples(examples, vocab, max_len)
    return evaluate_predictions(labels, class_probabilities(model, ids))
