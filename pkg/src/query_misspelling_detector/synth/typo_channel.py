"""Keyboard-aware typo channel.

Edits keep the text in normalized form (no leading/trailing or doubled
spaces). Each operation has an edit cost equal to its Levenshtein cost, so
the reported edit count bounds the edit distance to the source text.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..utils.errors import ConfigurationError, InapplicableChannelError
from ..utils.logging_config import get_logger
from .resources import qwerty_adjacency


logger = get_logger(__name__)

OPERATIONS = ("substitution", "transposition", "deletion", "insertion", "space")

# Levenshtein距離で見た各操作のコスト（隣接文字の入れ替えは2）
OP_COST = {
    "substitution": 1,
    "transposition": 2,
    "deletion": 1,
    "insertion": 1,
    "space": 1,
}

# 連続した編集で元のテキストに戻ってしまった場合の再試行回数
MAX_ATTEMPTS = 20


@dataclass(frozen=True)
class TypoChannel:
    """タイプミスの発生モデル。"""

    op_probabilities: dict[str, float]
    max_edits: int = 2
    extra_edit_prob: float = 0.25
    adjacency: dict[str, list[str]] = field(default_factory=qwerty_adjacency, compare=False, repr=False)

    def __post_init__(self) -> None:
        unknown = set(self.op_probabilities) - set(OPERATIONS)
        if unknown:
            raise ConfigurationError(
                f"不明なタイプミス操作です: {sorted(unknown)}",
                {"operations": sorted(unknown)}
            )
        if any(p < 0 for p in self.op_probabilities.values()):
            raise ConfigurationError("操作の確率は0以上である必要があります")
        total = sum(self.op_probabilities.values())
        if abs(total - 1.0) > 1e-9:
            raise ConfigurationError(
                "操作の確率の合計は1である必要があります",
                {"total": total}
            )
        if self.max_edits < 1:
            raise ConfigurationError("max_editsは1以上である必要があります", {"max_edits": self.max_edits})
        if not 0.0 <= self.extra_edit_prob < 1.0:
            raise ConfigurationError("extra_edit_probは[0, 1)の範囲である必要があります")

    @classmethod
    def only(cls, operation: str, max_edits: int = 2) -> "TypoChannel":
        """単一操作のみのチャネル。"""
        return cls(op_probabilities={operation: 1.0}, max_edits=max_edits)


def _neighbor_ok(text: str, i: int) -> bool:
    return 0 <= i < len(text) and text[i] != " "


def _substitution_sites(text: str, adjacency: dict[str, list[str]]) -> list[int]:
    return [i for i, ch in enumerate(text) if ch in adjacency]


def _deletion_sites(text: str) -> list[int]:
    if len(text) <= 1:
        return []
    sites = []
    for i, ch in enumerate(text):
        if ch == " ":
            continue
        left = text[i - 1] if i > 0 else " "
        right = text[i + 1] if i + 1 < len(text) else " "
        # 1文字の単語を消すと二重スペースになる
        if left == " " and right == " ":
            continue
        sites.append(i)
    return sites


def _insertion_sites(text: str, adjacency: dict[str, list[str]]) -> list[int]:
    sites = []
    for i in range(len(text) + 1):
        anchor = _insertion_anchor(text, i)
        if anchor is not None and anchor in adjacency:
            sites.append(i)
    return sites


def _insertion_anchor(text: str, i: int) -> Optional[str]:
    if _neighbor_ok(text, i - 1):
        return text[i - 1]
    if _neighbor_ok(text, i):
        return text[i]
    return None


def _transposition_sites(text: str) -> list[int]:
    return [
        i for i in range(len(text) - 1)
        if text[i] != " " and text[i + 1] != " " and text[i] != text[i + 1]
    ]


def _space_sites(text: str) -> list[int]:
    # 単語内への分割（1..len-1）と既存スペースの削除（結合）
    return [
        i for i in range(1, len(text))
        if (text[i - 1] != " " and text[i] != " ") or text[i] == " "
    ]


def _sites(op: str, text: str, adjacency: dict[str, list[str]]) -> list[int]:
    if op == "substitution":
        return _substitution_sites(text, adjacency)
    if op == "deletion":
        return _deletion_sites(text)
    if op == "insertion":
        return _insertion_sites(text, adjacency)
    if op == "transposition":
        return _transposition_sites(text)
    return _space_sites(text)


def _apply(op: str, text: str, i: int, rng: np.random.Generator, adjacency: dict[str, list[str]]) -> str:
    if op == "substitution":
        choices = adjacency[text[i]]
        return text[:i] + choices[int(rng.integers(len(choices)))] + text[i + 1:]
    if op == "deletion":
        return text[:i] + text[i + 1:]
    if op == "insertion":
        anchor = _insertion_anchor(text, i)
        # 隣接キーまたは同じキーの二度押し
        choices = adjacency[anchor] + [anchor]
        return text[:i] + choices[int(rng.integers(len(choices)))] + text[i:]
    if op == "transposition":
        return text[:i] + text[i + 1] + text[i] + text[i + 2:]
    if text[i] == " ":
        return text[:i] + text[i + 1:]
    return text[:i] + " " + text[i:]


def _applicable(channel: TypoChannel, text: str, budget: int) -> list[str]:
    return [
        op for op in OPERATIONS
        if channel.op_probabilities.get(op, 0.0) > 0
        and OP_COST[op] <= budget
        and _sites(op, text, channel.adjacency)
    ]


def _choose(channel: TypoChannel, ops: list[str], rng: np.random.Generator) -> str:
    probs = np.array([channel.op_probabilities[op] for op in ops], dtype=np.float64)
    return ops[int(rng.choice(len(ops), p=probs / probs.sum()))]


def inject_typo(
    text: str,
    channel: TypoChannel,
    seed: int | np.random.Generator,
) -> tuple[str, int]:
    """
    正規化済みテキストにタイプミスを注入する。

    Args:
        text: 空でない正規化済みテキスト
        channel: タイプミスチャネル
        seed: 乱数シードまたはGenerator

    Returns:
        (タイプミス後のテキスト, 編集コスト) ただし 1 <= 編集コスト <= max_edits

    Raises:
        InapplicableChannelError: 有効な操作がどれも適用できない場合
    """
    if not text:
        raise InapplicableChannelError("空のテキストにはタイプミスを注入できません")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)

    if not _applicable(channel, text, channel.max_edits):
        raise InapplicableChannelError(
            f"適用可能なタイプミス操作がありません: {text!r}",
            {"text": text, "operations": sorted(channel.op_probabilities)}
        )

    budget = 1
    while budget < channel.max_edits and rng.random() < channel.extra_edit_prob:
        budget += 1

    for _ in range(MAX_ATTEMPTS):
        # 予算内で適用できる操作がない場合は上限まで広げる
        target = budget if _applicable(channel, text, budget) else channel.max_edits
        current, cost = text, 0
        while cost < target:
            ops = _applicable(channel, current, target - cost)
            if not ops:
                break
            op = _choose(channel, ops, rng)
            sites = _sites(op, current, channel.adjacency)
            current = _apply(op, current, sites[int(rng.integers(len(sites)))], rng, channel.adjacency)
            cost += OP_COST[op]
        if current != text and cost >= 1:
            return current, cost

    raise InapplicableChannelError(
        f"元のテキストと異なるタイプミスを生成できません: {text!r}",
        {"text": text}
    )

