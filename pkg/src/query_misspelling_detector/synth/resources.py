"""Access to the data files shipped with the synth package."""

import json
from functools import lru_cache
from importlib import resources
from typing import Any


@lru_cache(maxsize=None)
def load_resource(name: str) -> Any:
    """synth/data配下のJSONファイルを読み込む（結果はキャッシュ）。"""
    path = resources.files("query_misspelling_detector.synth").joinpath("data", name)
    with path.open("r", encoding="utf-8") as f:
        return json.load(f)


def qwerty_adjacency() -> dict[str, list[str]]:
    return load_resource("qwerty_adjacency.json")


def name_grammar() -> dict[str, Any]:
    return load_resource("name_grammar.json")


def general_words() -> list[str]:
    return load_resource("general_words.json")
