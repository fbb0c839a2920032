"""Gazetteer of POI / address-like entities with Zipf popularity."""

from dataclasses import dataclass
from functools import cached_property
from typing import Any, Optional

import numpy as np

from ..text.normalizer import normalize_text
from ..utils.errors import ConfigurationError
from ..utils.logging_config import get_logger
from .resources import name_grammar as default_name_grammar


logger = get_logger(__name__)

# ユニークなエンティティを集めるための試行回数の上限（エンティティ数に対する倍率）
MAX_ATTEMPTS_PER_ENTITY = 50


@dataclass(frozen=True)
class Gazetteer:
    """エンティティ一覧と出現頻度（Zipf分布）。"""

    entities: tuple[str, ...]
    weights: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(set(self.entities)) != len(self.entities):
            raise ConfigurationError("ガゼッティアのエンティティが重複しています")
        if len(self.weights) != len(self.entities):
            raise ConfigurationError("エンティティ数と重みの数が一致しません")
        if any(w <= 0 for w in self.weights):
            raise ConfigurationError("ガゼッティアの重みは正である必要があります")

    def __len__(self) -> int:
        return len(self.entities)

    @cached_property
    def entity_set(self) -> frozenset[str]:
        return frozenset(self.entities)

    def __contains__(self, text: str) -> bool:
        return text in self.entity_set

    @cached_property
    def probabilities(self) -> np.ndarray:
        p = np.asarray(self.weights, dtype=np.float64)
        return p / p.sum()

    def sample_index(self, rng: np.random.Generator) -> int:
        """人気度に従ってエンティティを1つ選ぶ。"""
        return int(rng.choice(len(self.entities), p=self.probabilities))


def zipf_weights(n: int, exponent: float) -> tuple[float, ...]:
    """順位1..nのZipf重み（合計1）。"""
    ranks = np.arange(1, n + 1, dtype=np.float64)
    raw = ranks ** (-exponent)
    return tuple(float(w) for w in raw / raw.sum())


def _invented_name(rng: np.random.Generator, syllables: list[str]) -> str:
    n_syllables = int(rng.integers(2, 4))
    return "".join(syllables[int(rng.integers(len(syllables)))] for _ in range(n_syllables))


def _pick(rng: np.random.Generator, items: list[str]) -> str:
    return items[int(rng.integers(len(items)))]


def _render(template: str, rng: np.random.Generator, grammar: dict[str, Any]) -> str:
    """テンプレート名から1つのエンティティ文字列を生成する。"""
    low, high = grammar["number_range"]
    number = str(int(rng.integers(low, high + 1)))
    if template == "stem_poi":
        return f"{_pick(rng, grammar['stems'])} {_pick(rng, grammar['poi_types'])}"
    if template == "invented_poi":
        return f"{_invented_name(rng, grammar['syllables'])} {_pick(rng, grammar['poi_types'])}"
    if template == "invented_place":
        return _invented_name(rng, grammar["syllables"])
    if template == "the_stem":
        return f"the {_pick(rng, grammar['stems'])}"
    if template == "address_direction":
        return f"{number} {_pick(rng, grammar['directions'])} {_pick(rng, grammar['streets'])}"
    if template == "address_street":
        return f"{number} {_pick(rng, grammar['streets'])}"
    if template == "address_suffix":
        return f"{number} {_pick(rng, grammar['streets'])} {_pick(rng, grammar['street_suffixes'])}"
    if template == "number_direction":
        return f"{number} {_pick(rng, grammar['directions'])}"
    raise ConfigurationError(f"不明なテンプレートです: {template}", {"template": template})


def generate_gazetteer(
    seed: int,
    n_entities: int,
    name_grammar: Optional[dict[str, Any]] = None,
    zipf_exponent: float = 1.1,
) -> Gazetteer:
    """
    ガゼッティアを生成する（seedと設定に対して決定的）。

    Args:
        seed: 乱数シード
        n_entities: エンティティ数（1以上）
        name_grammar: 名前の文法（Noneの場合は同梱のname_grammar.json）
        zipf_exponent: 人気度のZipf指数

    Returns:
        正規化済みでユニークなエンティティのガゼッティア

    Raises:
        ConfigurationError: n_entitiesが0以下、または文法から十分な数を生成できない場合
    """
    if n_entities < 1:
        raise ConfigurationError(
            "n_entitiesは1以上である必要があります",
            {"n_entities": n_entities}
        )
    grammar = name_grammar or default_name_grammar()
    templates = sorted(grammar["templates"])
    probs = np.array([grammar["templates"][t] for t in templates], dtype=np.float64)
    probs = probs / probs.sum()

    rng = np.random.default_rng(seed)
    seen: set[str] = set()
    entities: list[str] = []
    attempts = 0
    while len(entities) < n_entities:
        attempts += 1
        if attempts > n_entities * MAX_ATTEMPTS_PER_ENTITY:
            raise ConfigurationError(
                "文法から必要な数のユニークなエンティティを生成できません",
                {"n_entities": n_entities, "generated": len(entities)}
            )
        template = templates[int(rng.choice(len(templates), p=probs))]
        entity = normalize_text(_render(template, rng, grammar))
        if entity and entity not in seen:
            seen.add(entity)
            entities.append(entity)

    logger.info(f"ガゼッティアを生成: {n_entities}エンティティ (seed={seed})")
    return Gazetteer(entities=tuple(entities), weights=zipf_weights(n_entities, zipf_exponent))
