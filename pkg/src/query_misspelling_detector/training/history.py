"""Per-epoch training history, best-epoch selection and the model comparison table."""

import math
from dataclasses import dataclass, field
from typing import Any, Optional, Sequence

from ..readers.jsonl_reader import JsonlReader
from ..utils.errors import ParseError
from ..writers.jsonl_writer import JsonlWriter
from .metrics import MetricsReport


@dataclass(frozen=True)
class EpochRecord:
    epoch: int  # 1始まり
    train_loss: float
    dev: Optional[MetricsReport] = None
    dev_loss: Optional[float] = None

    @property
    def score(self) -> float:
        """大きいほど良い選択基準（分類: devマクロF1、MLM: -dev損失）。"""
        if self.dev is not None:
            macro = self.dev.macro_f1
            return macro if macro is not None else -math.inf
        if self.dev_loss is not None:
            return -self.dev_loss
        return -math.inf


def select_best_epoch(scores: Sequence[float]) -> int:
    """最大スコアのエポック（1始まり、同点は最も早いもの）。"""
    if not scores:
        return 0
    best = 0
    for index, score in enumerate(scores):
        if score > scores[best]:
            best = index
    return best + 1


@dataclass
class TrainHistory:
    """1回の学習の全エポック記録。"""

    model: str
    task: str
    records: list[EpochRecord] = field(default_factory=list)

    @property
    def best_epoch(self) -> int:
        return select_best_epoch([r.score for r in self.records])

    @property
    def best(self) -> Optional[EpochRecord]:
        return self.records[self.best_epoch - 1] if self.records else None

    def to_records(self) -> list[dict[str, Any]]:
        rows = []
        for record in self.records:
            rows.append({
                "model": self.model,
                "task": self.task,
                "epoch": record.epoch,
                "train_loss": record.train_loss,
                "dev_loss": record.dev_loss,
                "dev_macro_f1": record.dev.macro_f1 if record.dev else None,
                "dev_f1_misspelt": record.dev.f1_misspelt if record.dev else None,
                "dev": record.dev.to_dict() if record.dev else None,
                "best_epoch": self.best_epoch,
            })
        return rows

    def save(self, path: str) -> int:
        """JSON-lines（1行1エポック）で書き出す。"""
        return JsonlWriter().write_records(self.to_records(), path)

    @classmethod
    def load(cls, path: str) -> "TrainHistory":
        """
        Raises:
            ParseError: 履歴の行にフィールドが欠けている、または空の場合
        """
        history: Optional[TrainHistory] = None
        for line_number, row in JsonlReader().iter_records(path):
            try:
                if history is None:
                    history = cls(model=row["model"], task=row["task"])
                dev = MetricsReport.from_dict(row["dev"]) if row.get("dev") else None
                history.records.append(
                    EpochRecord(int(row["epoch"]), float(row["train_loss"]), dev, row.get("dev_loss"))
                )
            except (KeyError, TypeError, ValueError) as e:
                raise ParseError(
                    f"学習履歴の形式が不正です: {path}:{line_number} ({e})",
                    {"file_path": path, "line_number": line_number, "error": str(e)}
                ) from e
        if history is None:
            raise ParseError(f"学習履歴が空です: {path}", {"file_path": path})
        return history


@dataclass(frozen=True)
class ComparisonRow:
    """比較表の1行（各モデルのベストエポック）。"""

    model: str
    task: str
    best_epoch: int
    macro_f1: Optional[float]
    f1_misspelt: Optional[float]
    dev_loss: Optional[float]

    def to_dict(self) -> dict[str, Any]:
        return {
            "Model": self.model,
            "Task": self.task,
            "Best Epoch": self.best_epoch,
            "Macro F1": self.macro_f1,
            "F1 (misspelt)": self.f1_misspelt,
            "Dev Loss": self.dev_loss,
        }


def compare_histories(histories: Sequence[TrainHistory]) -> list[ComparisonRow]:
    """ベストエポックのdev指標を並べ、マクロF1の昇順に並べる（指標なしは先頭）。"""
    rows = []
    for history in histories:
        best = history.best
        rows.append(ComparisonRow(
            model=history.model,
            task=history.task,
            best_epoch=history.best_epoch,
            macro_f1=best.dev.macro_f1 if best and best.dev else None,
            f1_misspelt=best.dev.f1_misspelt if best and best.dev else None,
            dev_loss=best.dev_loss if best else None,
        ))
    return sorted(rows, key=lambda r: (r.macro_f1 is not None, r.macro_f1 or 0.0, r.model))
