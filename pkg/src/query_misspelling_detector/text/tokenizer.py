"""Word and subword vocabularies with encode/decode for both model families."""

import hashlib
import heapq
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..utils.errors import ConfigurationError, InputFileNotFoundError, OutputWriteError
from ..utils.logging_config import get_logger
from ..utils.models import LabeledExample


logger = get_logger(__name__)


SPECIAL_TOKENS = ("[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]")
PAD_ID, UNK_ID, CLS_ID, SEP_ID, MASK_ID = range(len(SPECIAL_TOKENS))
N_SPECIAL = len(SPECIAL_TOKENS)

# 単語先頭のサブワードに付ける境界マーカー（正規化後のテキストには現れない記号）
WORD_BOUNDARY = "▁"


@dataclass(frozen=True)
class Vocabulary:
    """語彙（id = tokensのインデックス、0〜4は特殊トークン）。"""

    kind: str  # "word" or "subword"
    tokens: tuple[str, ...]
    max_size: int
    _index: dict[str, int] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.kind not in ("word", "subword"):
            raise ConfigurationError(f"不明な語彙の種類です: {self.kind}", {"kind": self.kind})
        if tuple(self.tokens[:N_SPECIAL]) != SPECIAL_TOKENS:
            raise ConfigurationError("特殊トークンはid 0〜4を占める必要があります")
        if len(self.tokens) > self.max_size:
            raise ConfigurationError(
                "語彙サイズが上限を超えています",
                {"size": len(self.tokens), "max_size": self.max_size}
            )
        index = {token: i for i, token in enumerate(self.tokens)}
        if len(index) != len(self.tokens):
            raise ConfigurationError("語彙のトークンが重複しています")
        self._index.update(index)

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def id_of(self, token: str) -> int:
        """トークンのid（未知語はUNK）。"""
        return self._index.get(token, UNK_ID)

    @property
    def content_hash(self) -> str:
        """トークン列のSHA-256（チェックポイントの語彙参照に使う）。"""
        return hashlib.sha256("\n".join(self.tokens).encode("utf-8")).hexdigest()

    @property
    def max_token_length(self) -> int:
        return max((len(t) for t in self.tokens[N_SPECIAL:]), default=1)

    def save(self, path: str) -> None:
        """1行1トークン（行番号 = id）で書き出す。"""
        target = Path(path)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8", newline="\n") as f:
                for token in self.tokens:
                    f.write(token + "\n")
        except OSError as e:
            raise OutputWriteError(
                f"語彙ファイルの書き込みに失敗しました: {path}",
                {"path": str(target), "error": str(e)}
            ) from e
        logger.info(f"語彙を保存: {path} (種類: {self.kind}, サイズ: {len(self)})")

    @classmethod
    def load(cls, path: str) -> "Vocabulary":
        """語彙ファイルを読み込む（種類は境界マーカーの有無から判定）。"""
        source = Path(path)
        if not source.exists():
            raise InputFileNotFoundError(
                f"語彙ファイルが見つかりません: {path}",
                {"file_path": str(source)}
            )
        with open(source, "r", encoding="utf-8") as f:
            tokens = tuple(line.rstrip("\n") for line in f)
        return cls.from_tokens(tokens)

    @classmethod
    def from_tokens(cls, tokens: Sequence[str]) -> "Vocabulary":
        """トークン列から語彙を作る（種類は境界マーカーの有無から判定）。"""
        tokens = tuple(tokens)
        kind = "subword" if any(t.startswith(WORD_BOUNDARY) for t in tokens) else "word"
        return cls(kind=kind, tokens=tokens, max_size=len(tokens))


def _texts(corpus: Iterable[str | LabeledExample]) -> Iterable[str]:
    for item in corpus:
        yield item.query if isinstance(item, LabeledExample) else item


def build_word_vocab(corpus: Iterable[str | LabeledExample], max_size: int) -> Vocabulary:
    """
    空白区切りの単語語彙を構築する。

    Args:
        corpus: 正規化済みテキストまたはLabeledExampleの列
        max_size: 特殊トークンを含む語彙サイズの上限

    Returns:
        (頻度降順, トークン昇順) で並べた語彙
    """
    if max_size < N_SPECIAL:
        raise ConfigurationError(
            f"語彙サイズは特殊トークン数({N_SPECIAL})以上である必要があります",
            {"max_size": max_size}
        )
    counts: Counter[str] = Counter()
    n_texts = 0
    for text in _texts(corpus):
        counts.update(text.split())
        n_texts += 1
    if n_texts == 0:
        raise ConfigurationError("語彙を構築するコーパスが空です")

    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    tokens = SPECIAL_TOKENS + tuple(token for token, _ in ranked[: max_size - N_SPECIAL])
    logger.info(f"単語語彙を構築: {len(tokens)}トークン（候補: {len(counts)}語）")
    return Vocabulary(kind="word", tokens=tokens, max_size=max_size)


def _word_symbols(word: str) -> list[str]:
    return [WORD_BOUNDARY + word[0]] + list(word[1:])


def _pairs(symbols: Sequence[str]) -> Counter[tuple[str, str]]:
    return Counter(zip(symbols, symbols[1:]))


def _apply_merge(symbols: list[str], pair: tuple[str, str]) -> list[str]:
    merged: list[str] = []
    i = 0
    while i < len(symbols):
        if i + 1 < len(symbols) and symbols[i] == pair[0] and symbols[i + 1] == pair[1]:
            merged.append(pair[0] + pair[1])
            i += 2
        else:
            merged.append(symbols[i])
            i += 1
    return merged


def build_subword_vocab(
    corpus: Iterable[str | LabeledExample],
    target_size: int,
    n_merges_cap: int = 10000,
) -> Vocabulary:
    """
    バイトペア方式の貪欲マージでサブワード語彙を構築する。

    最頻ペアを（頻度降順, ペア辞書順）で選び、target_sizeまたはマージ上限で停止する。
    基本記号（単語先頭は境界マーカー付き）は常に語彙に含まれる（サイズが許す限り）。
    """
    if target_size <= N_SPECIAL:
        raise ConfigurationError(
            f"サブワード語彙サイズは{N_SPECIAL}より大きい必要があります",
            {"target_size": target_size}
        )

    word_counts: Counter[str] = Counter()
    for text in _texts(corpus):
        word_counts.update(text.split())
    if not word_counts:
        raise ConfigurationError("語彙を構築するコーパスが空です")

    # 単語は決定的な順序で扱う
    words = sorted(word_counts)
    freqs = [word_counts[w] for w in words]
    symbols = [_word_symbols(w) for w in words]

    base_counts: Counter[str] = Counter()
    for syms, freq in zip(symbols, freqs):
        for sym in syms:
            base_counts[sym] += freq
    base = sorted(base_counts.items(), key=lambda kv: (-kv[1], kv[0]))
    tokens: list[str] = list(SPECIAL_TOKENS)
    tokens.extend(sym for sym, _ in base[: target_size - N_SPECIAL])
    known = set(tokens)

    pair_counts: Counter[tuple[str, str]] = Counter()
    pair_words: dict[tuple[str, str], set[int]] = defaultdict(set)
    for idx, (syms, freq) in enumerate(zip(symbols, freqs)):
        for pair, n in _pairs(syms).items():
            pair_counts[pair] += n * freq
            pair_words[pair].add(idx)

    # 遅延無効化付きヒープ（古いエントリは取り出し時に捨てる）
    heap = [(-count, pair) for pair, count in pair_counts.items()]
    heapq.heapify(heap)

    n_merges = 0
    while len(tokens) < target_size and n_merges < n_merges_cap and heap:
        neg_count, pair = heapq.heappop(heap)
        if pair_counts.get(pair, 0) != -neg_count or neg_count == 0:
            continue

        affected = sorted(pair_words.pop(pair, set()))
        touched: set[tuple[str, str]] = set()
        for idx in affected:
            old = symbols[idx]
            new = _apply_merge(old, pair)
            if new == old:
                continue
            freq = freqs[idx]
            for p, n in _pairs(old).items():
                pair_counts[p] -= n * freq
                touched.add(p)
                if p != pair:
                    pair_words[p].discard(idx)
            for p, n in _pairs(new).items():
                pair_counts[p] += n * freq
                pair_words[p].add(idx)
                touched.add(p)
            symbols[idx] = new

        pair_counts.pop(pair, None)
        for p in touched:
            count = pair_counts.get(p, 0)
            if count > 0:
                heapq.heappush(heap, (-count, p))
            else:
                pair_counts.pop(p, None)

        merged = pair[0] + pair[1]
        if merged not in known:
            tokens.append(merged)
            known.add(merged)
        n_merges += 1

    logger.info(f"サブワード語彙を構築: {len(tokens)}トークン（マージ数: {n_merges}）")
    return Vocabulary(kind="subword", tokens=tuple(tokens), max_size=target_size)


def _segment_word(word: str, vocab: Vocabulary) -> list[int]:
    """貪欲最長一致で単語をサブワードidに分割する（未知文字はUNK）。"""
    text = WORD_BOUNDARY + word
    ids: list[int] = []
    max_len = vocab.max_token_length
    start = 0
    while start < len(text):
        end = min(len(text), start + max_len)
        match: Optional[int] = None
        while end > start:
            piece = text[start:end]
            if piece in vocab and piece != WORD_BOUNDARY:
                match = vocab.id_of(piece)
                break
            end -= 1
        if match is None:
            # 境界マーカー＋未知文字はまとめて1つのUNKにする
            step = 2 if start == 0 and len(text) > 1 else 1
            ids.append(UNK_ID)
            start += step
        else:
            ids.append(match)
            start = end
    return ids


def _truncate_middle(ids: list[int], capacity: int) -> list[int]:
    if len(ids) <= capacity:
        return ids
    head = (capacity + 1) // 2
    tail = capacity - head
    return ids[:head] + (ids[len(ids) - tail:] if tail else [])


def encode(text: str, vocab: Vocabulary, max_len: Optional[int] = None) -> list[int]:
    """
    テキストをid列に変換する（例外を出さない全域関数）。

    Args:
        text: 正規化済みテキスト
        vocab: 語彙
        max_len: 固定長（Noneの場合はパディング・切り詰めなし）

    Returns:
        subword: [CLS] … [SEP] + PAD、長すぎる場合は中央部分を切り詰める
        word: 単語id（未知語はUNK）+ PAD、長すぎる場合は末尾を切り詰める
    """
    if vocab.kind == "subword":
        if max_len is not None and max_len < 2:
            raise ConfigurationError(
                "サブワード語彙のmax_lenは2以上である必要があります（CLS/SEP用）",
                {"max_len": max_len}
            )
        content: list[int] = []
        for word in text.split():
            content.extend(_segment_word(word, vocab))
        if max_len is not None:
            content = _truncate_middle(content, max_len - 2)
        ids = [CLS_ID] + content + [SEP_ID]
    else:
        ids = [vocab.id_of(word) for word in text.split()]
        if max_len is not None:
            ids = ids[:max_len]

    if max_len is not None:
        ids = ids + [PAD_ID] * (max_len - len(ids))
    return ids


def encode_batch(texts: Sequence[str], vocab: Vocabulary, max_len: int) -> list[list[int]]:
    """複数テキストを固定長で変換する。"""
    return [encode(text, vocab, max_len) for text in texts]


def decode(ids: Sequence[int], vocab: Vocabulary) -> str:
    """id列をテキストに戻す（PAD/CLS/SEPは除去）。"""
    skipped = {PAD_ID, CLS_ID, SEP_ID}
    pieces = [vocab.tokens[i] for i in ids if i not in skipped]
    if vocab.kind == "word":
        return " ".join(pieces)
    return "".join(pieces).replace(WORD_BOUNDARY, " ").strip()
