"""共通データモデル定義。"""

from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass(frozen=True)
class NormalizedQuery:
    """正規化済みクエリ（NFC、小文字、句読点なし、単一スペース）。"""

    text: str

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class LabeledExample:
    """分類器の学習単位（Query / Correction / IsMisspelt）。"""

    query: str
    correction: str  # 分析用の参照のみ
    is_misspelt: bool


@dataclass(frozen=True)
class MinedPair:
    """マイニングで得られた (Q, C) ペア。"""

    q: str
    c: str
    count: int = 1
    source: str = "backtrack"  # "backtrack" or "transfer"


@dataclass(frozen=True)
class GroundTruthPair:
    """合成ログに注入した正解ペア（マイナー評価用）。"""

    misspelt: str
    correction: str
    session_id: str


@dataclass
class KeystrokeSession:
    """1ユーザーセッション: 時刻付きスナップショットと最終エンゲージメント。"""

    session_id: str
    snapshots: list[tuple[int, str]]
    engagement: Optional[str] = None
    transfer_correction: Optional[tuple[str, str]] = None

    @property
    def final_text(self) -> str:
        """最後のスナップショットのテキスト。"""
        return self.snapshots[-1][1]

    def to_dict(self) -> dict[str, Any]:
        """JSON-lines出力用の辞書に変換する。"""
        return {
            "session_id": self.session_id,
            "snapshots": [[tick, text] for tick, text in self.snapshots],
            "engagement": self.engagement,
            "transfer_correction": (
                list(self.transfer_correction) if self.transfer_correction else None
            ),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "KeystrokeSession":
        """辞書からセッションを復元する。"""
        transfer = data.get("transfer_correction")
        return cls(
            session_id=str(data["session_id"]),
            snapshots=[(int(tick), str(text)) for tick, text in data["snapshots"]],
            engagement=data.get("engagement"),
            transfer_correction=(str(transfer[0]), str(transfer[1])) if transfer else None,
        )


@dataclass
class SessionBatch:
    """シャード単位のセッション生成結果。"""

    sessions: list[KeystrokeSession] = field(default_factory=list)
    ground_truth: list[GroundTruthPair] = field(default_factory=list)
