"""Query text normalizer.

Every downstream consumer (miner, dataset, tokenizers, predict) sees text in
one canonical form: NFC, lowercase, punctuation replaced by spaces, junk
characters (controls, emoji and other symbols, replacement characters)
removed, whitespace collapsed. Combining marks stay on their base letter
("İ" lowercases to "i" + U+0307) unless diacritics are stripped; a mark left
without a base (after a space or at the start) is dropped.
"""

import unicodedata
from typing import Iterable, Iterator

from ..utils.models import NormalizedQuery


def _map_char(ch: str) -> str:
    """1文字を正規化後の表現に変換する（空文字は削除を意味する）。"""
    if ch.isspace():
        return " "
    category = unicodedata.category(ch)
    if category.startswith("Z"):
        return " "
    # 句読点はスペースに置換（"sno-isle" -> "sno isle"）
    if category.startswith("P"):
        return " "
    # 制御文字・書式文字・未割当・記号（絵文字、U+FFFDを含む）は削除
    if category.startswith("C") or category.startswith("S"):
        return ""
    return ch


def _drop_orphan_marks(text: str) -> str:
    """基底文字のない結合文字（先頭・スペース直後）を削除する。基底文字に付いたものは残す。"""
    kept: list[str] = []
    for ch in text:
        if unicodedata.category(ch).startswith("M") and (not kept or kept[-1] == " "):
            continue
        kept.append(ch)
    return "".join(kept)


def _strip_marks(text: str) -> str:
    decomposed = unicodedata.normalize("NFD", text)
    return "".join(ch for ch in decomposed if unicodedata.category(ch) != "Mn")


def normalize_text(raw: str, strip_diacritics: bool = False) -> str:
    """
    生のクエリ文字列を正規化した文字列を返す。

    Args:
        raw: 任意のUnicode文字列（空文字を含む）
        strip_diacritics: Trueの場合はダイアクリティカルマークを除去（"café" -> "cafe"）

    Returns:
        正規化済みテキスト（入力がすべてジャンクの場合は空文字）
    """
    text = unicodedata.normalize("NFC", raw)
    if strip_diacritics:
        text = _strip_marks(text)
    text = unicodedata.normalize("NFC", text.lower())
    text = _drop_orphan_marks("".join(_map_char(ch) for ch in text))
    # 削除で結合文字が隣接する場合があるため再度NFC
    text = unicodedata.normalize("NFC", text)
    return " ".join(text.split())


def normalize(raw: str, strip_diacritics: bool = False) -> NormalizedQuery:
    """正規化済みクエリを返す（冪等）。"""
    return NormalizedQuery(normalize_text(raw, strip_diacritics=strip_diacritics))


class QueryNormalizer:
    """設定を保持したクエリ正規化器。"""

    def __init__(self, strip_diacritics: bool = False):
        """
        正規化器を初期化する。

        Args:
            strip_diacritics: ダイアクリティカルマークを除去するかどうか
        """
        self.strip_diacritics = strip_diacritics

    def __call__(self, raw: str) -> str:
        return normalize_text(raw, strip_diacritics=self.strip_diacritics)

    def normalize(self, raw: str) -> NormalizedQuery:
        """正規化済みクエリを返す。"""
        return NormalizedQuery(self(raw))

    def normalize_lines(self, lines: Iterable[str]) -> Iterator[str]:
        """1行1クエリの入力を正規化して順に返す。"""
        for line in lines:
            yield self(line.rstrip("\n"))
