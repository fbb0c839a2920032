"""Misspelling-ratio enforcement and disjoint train/dev/test splits."""

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..utils.errors import ConfigurationError, InsufficientClassError, SizingError
from ..utils.logging_config import get_logger
from ..utils.models import LabeledExample


logger = get_logger(__name__)


@dataclass(frozen=True)
class SplitSpec:
    """分割サイズと誤りクエリの割合。"""

    train_n: int
    dev_n: int
    test_n: int
    misspell_ratio: float
    seed: int = 42

    def __post_init__(self) -> None:
        for name in ("train_n", "dev_n", "test_n"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name}は0以上である必要があります", {name: getattr(self, name)})
        if not 0.0 <= self.misspell_ratio <= 1.0:
            raise ConfigurationError(
                "misspell_ratioは[0, 1]の範囲である必要があります",
                {"misspell_ratio": self.misspell_ratio}
            )

    @property
    def sizes(self) -> tuple[int, int, int]:
        return self.train_n, self.dev_n, self.test_n

    @property
    def total(self) -> int:
        return self.train_n + self.dev_n + self.test_n

    def misspelt_count(self, size: int) -> int:
        """サイズsizeの分割に含める誤りクエリの数。"""
        return int(round(self.misspell_ratio * size))


def dedup(pool: Iterable[LabeledExample]) -> list[LabeledExample]:
    """
    クエリテキストで重複を除く。同じクエリにTrueとFalseがある場合はTrueを残す。

    Returns:
        クエリ順に並べた例
    """
    kept: dict[str, LabeledExample] = {}
    for example in pool:
        current = kept.get(example.query)
        if current is None or (example.is_misspelt and not current.is_misspelt):
            kept[example.query] = example
    return [kept[q] for q in sorted(kept)]


def _sample(items: Sequence[LabeledExample], size: int, rng: np.random.Generator) -> set[int]:
    if size >= len(items):
        return set(range(len(items)))
    return {int(i) for i in rng.choice(len(items), size=size, replace=False)}


def enforce_ratio(
    pool: Sequence[LabeledExample],
    target: float,
    seed: int,
) -> list[LabeledExample]:
    """
    多い方のクラスを一様に間引いて誤りクエリの割合をtargetに合わせる（複製はしない）。

    Args:
        pool: 例の集合
        target: 誤りクエリの目標割合
        seed: 間引きの乱数シード

    Returns:
        元の順序を保った例のリスト（割合の誤差は1例以内）

    Raises:
        InsufficientClassError: 複製なしでは目標割合に届かない場合（不足するクラスを示す）
    """
    if not 0.0 <= target <= 1.0:
        raise ConfigurationError("targetは[0, 1]の範囲である必要があります", {"target": target})

    misspelt = [e for e in pool if e.is_misspelt]
    clean = [e for e in pool if not e.is_misspelt]
    m, k = len(misspelt), len(clean)

    def insufficient(cls: str) -> InsufficientClassError:
        return InsufficientClassError(
            f"目標割合{target}に必要な{cls}クラスの例が足りません",
            {"deficient_class": cls, "misspelt": m, "clean": k, "target": target}
        )

    if target > 0.0 and m == 0:
        raise insufficient("misspelt")
    if target < 1.0 and k == 0:
        raise insufficient("clean")

    if target == 0.0:
        keep_m, keep_k = 0, k
    elif target == 1.0:
        keep_m, keep_k = m, 0
    elif m / (m + k) > target:
        keep_m, keep_k = int(round(target * k / (1.0 - target))), k
        if keep_m == 0:
            raise insufficient("clean")
        keep_m = min(keep_m, m)
    elif m / (m + k) < target:
        keep_m, keep_k = m, int(round(m * (1.0 - target) / target))
        if keep_k == 0:
            raise insufficient("misspelt")
        keep_k = min(keep_k, k)
    else:
        return list(pool)

    rng = np.random.default_rng(seed)
    keep_misspelt = _sample(misspelt, keep_m, rng)
    keep_clean = _sample(clean, keep_k, rng)

    result: list[LabeledExample] = []
    mi = ci = 0
    for example in pool:
        if example.is_misspelt:
            if mi in keep_misspelt:
                result.append(example)
            mi += 1
        else:
            if ci in keep_clean:
                result.append(example)
            ci += 1
    logger.info(f"割合を調整: {m}+{k} -> {keep_m}+{keep_k} (target={target})")
    return result


def split(
    pool: Iterable[LabeledExample],
    spec: SplitSpec,
) -> tuple[list[LabeledExample], list[LabeledExample], list[LabeledExample]]:
    """
    重複を除いた後、クラスごとのシード付きシャッフルを連続区間で切り分ける。

    各分割はちょうど指定サイズで、誤りクエリの数は round(misspell_ratio * size)。
    クエリテキストは3つの分割の間で重ならない。

    Raises:
        SizingError: 重複除去後の例（またはいずれかのクラス）が足りない場合
    """
    unique = dedup(pool)
    misspelt = [e for e in unique if e.is_misspelt]
    clean = [e for e in unique if not e.is_misspelt]

    need_misspelt = [spec.misspelt_count(size) for size in spec.sizes]
    need_clean = [size - n for size, n in zip(spec.sizes, need_misspelt)]
    if len(unique) < spec.total or len(misspelt) < sum(need_misspelt) or len(clean) < sum(need_clean):
        raise SizingError(
            f"分割に必要な例が足りません（必要: {spec.total}, 重複除去後: {len(unique)}）",
            {
                "required": spec.total,
                "available": len(unique),
                "required_misspelt": sum(need_misspelt),
                "available_misspelt": len(misspelt),
                "required_clean": sum(need_clean),
                "available_clean": len(clean),
            }
        )

    rng = np.random.default_rng(spec.seed)
    misspelt_order = rng.permutation(len(misspelt))
    clean_order = rng.permutation(len(clean))

    outputs: list[list[LabeledExample]] = []
    mi = ci = 0
    for n_misspelt, n_clean in zip(need_misspelt, need_clean):
        part = [misspelt[int(i)] for i in misspelt_order[mi:mi + n_misspelt]]
        part += [clean[int(i)] for i in clean_order[ci:ci + n_clean]]
        mi += n_misspelt
        ci += n_clean
        outputs.append([part[int(i)] for i in rng.permutation(len(part))])

    train, dev, test = outputs
    logger.info(f"データを分割: train={len(train)}, dev={len(dev)}, test={len(test)} (seed={spec.seed})")
    return train, dev, test
