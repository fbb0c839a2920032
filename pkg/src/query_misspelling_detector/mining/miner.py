"""Mining (misspelt query, correction) pairs from keystroke sessions.

Recall comes from two sources: backtracking over a session's snapshots from
the engaged result, and transfer events where the existing search system
already rewrote the query. Precision comes from the distance band, majority
voting per misspelt query, and calibration against how often a correction
stands on its own as an uncorrected query.
"""

import math
import time
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from ..text.normalizer import normalize_text
from ..utils.errors import ConfigurationError
from ..utils.logging_config import get_logger
from ..utils.models import GroundTruthPair, KeystrokeSession, LabeledExample, MinedPair
from .distance import edit_distance, lcs_len


logger = get_logger(__name__)

# 浮動小数点の丸め誤差で切り上げ結果が1つずれないようにする
_CEIL_TOLERANCE = 1e-9


def _ceil_fraction(fraction: float, length: int) -> int:
    return math.ceil(fraction * length - _CEIL_TOLERANCE)


@dataclass(frozen=True)
class DistanceBand:
    """候補Qと訂正Cの形態的距離の許容範囲（Cの長さに対する割合）。"""

    min_dist: int = 1
    max_rel_dist: float = 0.4
    min_lcs_rel: float = 0.5
    length_gate: float = 0.8

    def __post_init__(self) -> None:
        if self.min_dist < 1:
            raise ConfigurationError("min_distは1以上である必要があります", {"min_dist": self.min_dist})
        if not 0.0 < self.max_rel_dist <= 1.0:
            raise ConfigurationError(
                "max_rel_distは(0, 1]の範囲である必要があります",
                {"max_rel_dist": self.max_rel_dist}
            )
        if not 0.0 <= self.min_lcs_rel <= 1.0:
            raise ConfigurationError(
                "min_lcs_relは[0, 1]の範囲である必要があります",
                {"min_lcs_rel": self.min_lcs_rel}
            )
        if not 0.0 <= self.length_gate <= 1.0:
            raise ConfigurationError(
                "length_gateは[0, 1]の範囲である必要があります",
                {"length_gate": self.length_gate}
            )

    @classmethod
    def from_config(cls, miner: Mapping[str, float]) -> "DistanceBand":
        return cls(
            min_dist=int(miner["min_dist"]),
            max_rel_dist=float(miner["max_rel_dist"]),
            min_lcs_rel=float(miner["min_lcs_rel"]),
            length_gate=float(miner["length_gate"]),
        )

    def min_length(self, correction: str) -> int:
        return _ceil_fraction(self.length_gate, len(correction))

    def accepts(self, candidate: str, correction: str) -> bool:
        """長さゲートと距離帯の両方を満たすかどうか。"""
        n = len(correction)
        if len(candidate) < self.min_length(correction):
            return False
        distance = edit_distance(candidate, correction)
        if not self.min_dist <= distance <= _ceil_fraction(self.max_rel_dist, n):
            return False
        return lcs_len(candidate, correction) >= _ceil_fraction(self.min_lcs_rel, n)


def backtrack_mine(session: KeystrokeSession, band: DistanceBand) -> list[MinedPair]:
    """
    エンゲージ先Cから時間を遡ってスナップショットを走査し、誤りクエリQを探す。

    Cの接頭辞（C自身を含む）は正しい入力の途中経過なので候補にしない。
    残りのうち長さゲートと距離帯を満たす最長のもの（同じ長さなら最も新しいもの）をQとする。
    """
    if session.engagement is None:
        return []
    correction = normalize_text(session.engagement)
    if not correction:
        return []

    best: str | None = None
    for _, text in reversed(session.snapshots):
        candidate = normalize_text(text)
        if not candidate or correction.startswith(candidate):
            continue
        if best is not None and len(candidate) <= len(best):
            continue
        if band.accepts(candidate, correction):
            best = candidate

    if best is None:
        return []
    return [MinedPair(q=best, c=correction, count=1, source="backtrack")]


def transfer_mine(session: KeystrokeSession) -> list[MinedPair]:
    """既存の検索システムによる書き換え (typed, corrected) をペアにする。"""
    if session.transfer_correction is None:
        return []
    typed, corrected = session.transfer_correction
    q, c = normalize_text(typed), normalize_text(corrected)
    if not q or not c or q == c:
        return []
    return [MinedPair(q=q, c=c, count=1, source="transfer")]


def _final_query(session: KeystrokeSession) -> str | None:
    """エンゲージされ、最後の入力が訂正されずにそのまま使われたクエリ。"""
    if session.engagement is None:
        return None
    engaged = normalize_text(session.engagement)
    if engaged and normalize_text(session.final_text) == engaged:
        return engaged
    return None


@dataclass
class CalibrationStats:
    """訂正候補がそれ自体で正しいクエリとして使われる頻度の集計。"""

    final_query_count: Counter[str] = field(default_factory=Counter)
    corrected_away_count: Counter[str] = field(default_factory=Counter)

    def add_session(self, session: KeystrokeSession) -> None:
        final = _final_query(session)
        if final is not None:
            self.final_query_count[final] += 1

    def add_pairs(self, pairs: Iterable[MinedPair]) -> None:
        for pair in pairs:
            self.corrected_away_count[pair.q] += pair.count

    def merge(self, other: "CalibrationStats") -> None:
        self.final_query_count.update(other.final_query_count)
        self.corrected_away_count.update(other.corrected_away_count)

    def survival(self, text: str) -> float | None:
        """final / (final + corrected_away)。統計に現れないテキストはNone。"""
        final = self.final_query_count.get(text, 0)
        total = final + self.corrected_away_count.get(text, 0)
        if total == 0:
            return None
        return final / total


def resolve_conflicts(pairs: Iterable[MinedPair]) -> dict[str, tuple[str, int]]:
    """
    多数決で各Qの訂正を1つに決める（同数なら辞書順で最小のC）。

    Returns:
        q -> (c, 勝ったcの合計件数)
    """
    totals: dict[str, Counter[str]] = defaultdict(Counter)
    for pair in pairs:
        totals[pair.q][pair.c] += pair.count

    resolved: dict[str, tuple[str, int]] = {}
    for q in sorted(totals):
        c, count = min(totals[q].items(), key=lambda kv: (-kv[1], kv[0]))
        resolved[q] = (c, count)
    return resolved


def calibrate(
    resolved: Mapping[str, tuple[str, int]],
    stats: CalibrationStats,
    theta: float,
) -> dict[str, tuple[str, int]]:
    """
    survival(c) >= theta のペアだけを残す。統計に現れないcのペアは残す。

    Raises:
        ConfigurationError: thetaが[0, 1]の範囲外の場合
    """
    if not 0.0 <= theta <= 1.0:
        raise ConfigurationError("thetaは[0, 1]の範囲である必要があります", {"theta": theta})
    kept: dict[str, tuple[str, int]] = {}
    for q, (c, count) in resolved.items():
        survival = stats.survival(c)
        if survival is None or survival >= theta:
            kept[q] = (c, count)
    return kept


def emit_labeled(
    pairs: Mapping[str, tuple[str, int]],
    sessions: Iterable[KeystrokeSession],
) -> list[LabeledExample]:
    """
    ラベル付きデータを作る。

    ペアごとに (q, c, True)、訂正されずにエンゲージされたセッションごとに (c', c', False)。
    同じクエリが両方に現れた場合はTrueの行を残す。出力は (query, correction) 順。
    """
    rows: dict[str, LabeledExample] = {
        q: LabeledExample(query=q, correction=c, is_misspelt=True) for q, (c, _) in pairs.items()
    }
    for session in sessions:
        final = _final_query(session)
        if final is not None and final not in rows:
            rows[final] = LabeledExample(query=final, correction=final, is_misspelt=False)
    return sorted(rows.values(), key=lambda e: (e.query, e.correction))


@dataclass(frozen=True)
class MiningScore:
    """正解ペアに対するマイニング結果の評価（ユニークな (q, c) 単位）。"""

    precision: float
    recall: float
    n_mined: int
    n_truth: int
    n_matched: int

    def to_dict(self) -> dict[str, float | int]:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "n_mined": self.n_mined,
            "n_truth": self.n_truth,
            "n_matched": self.n_matched,
        }


def score_pairs(
    mined: Iterable[MinedPair] | Mapping[str, tuple[str, int]],
    ground_truth: Iterable[GroundTruthPair],
) -> MiningScore:
    """マイニング結果を正解ペアと照合する。分母が0の場合は0.0とする。"""
    if isinstance(mined, Mapping):
        mined_set = {(q, c) for q, (c, _) in mined.items()}
    else:
        mined_set = {(p.q, p.c) for p in mined}
    truth_set = {(normalize_text(g.misspelt), normalize_text(g.correction)) for g in ground_truth}
    matched = len(mined_set & truth_set)
    return MiningScore(
        precision=matched / len(mined_set) if mined_set else 0.0,
        recall=matched / len(truth_set) if truth_set else 0.0,
        n_mined=len(mined_set),
        n_truth=len(truth_set),
        n_matched=matched,
    )


def _mine_chunk(args: tuple[Sequence[KeystrokeSession], DistanceBand]) -> tuple[list[MinedPair], CalibrationStats]:
    sessions, band = args
    pairs: list[MinedPair] = []
    stats = CalibrationStats()
    for session in sessions:
        pairs.extend(backtrack_mine(session, band))
        pairs.extend(transfer_mine(session))
        stats.add_session(session)
    stats.add_pairs(pairs)
    return pairs, stats


@dataclass
class MiningResult:
    """マイニングパイプラインの出力。"""

    raw_pairs: list[MinedPair]
    resolved: dict[str, tuple[str, int]]
    calibrated: dict[str, tuple[str, int]]
    stats: CalibrationStats
    labeled: list[LabeledExample]
    sources: dict[tuple[str, str], str]

    def pairs(self) -> list[MinedPair]:
        """校正後のペアを (q, c) 順で返す。"""
        return [
            MinedPair(q=q, c=c, count=count, source=self.sources[(q, c)])
            for q, (c, count) in sorted(self.calibrated.items())
        ]


class MiningPipeline:
    """セッション単位のmap（並列可）と、件数の加算によるreduceで構成されるパイプライン。"""

    def __init__(self, band: DistanceBand | None = None, theta: float = 0.5, shards: int = 1):
        """
        パイプラインを初期化する。

        Args:
            band: 距離帯（Noneの場合はデフォルト値）
            theta: 校正のしきい値
            shards: mapフェーズの並列ワーカー数（結果には影響しない）
        """
        if not 0.0 <= theta <= 1.0:
            raise ConfigurationError("thetaは[0, 1]の範囲である必要があります", {"theta": theta})
        if shards < 1:
            raise ConfigurationError("shardsは1以上である必要があります", {"shards": shards})
        self.band = band or DistanceBand()
        self.theta = theta
        self.shards = shards

    def run(self, sessions: Sequence[KeystrokeSession]) -> MiningResult:
        """全セッションをマイニングする。"""
        logger.info(f"マイニングを開始: {len(sessions)}セッション (shards={self.shards})")
        start_time = time.time()

        chunk_size = max(1, math.ceil(len(sessions) / self.shards))
        chunks = [(sessions[i:i + chunk_size], self.band) for i in range(0, len(sessions), chunk_size)]
        if self.shards > 1 and len(chunks) > 1:
            with ProcessPoolExecutor(max_workers=self.shards) as executor:
                results = list(executor.map(_mine_chunk, chunks))
        else:
            results = [_mine_chunk(chunk) for chunk in chunks]

        raw_pairs: list[MinedPair] = []
        stats = CalibrationStats()
        for pairs, chunk_stats in results:
            raw_pairs.extend(pairs)
            stats.merge(chunk_stats)

        resolved = resolve_conflicts(raw_pairs)
        calibrated = calibrate(resolved, stats, self.theta)
        labeled = emit_labeled(calibrated, sessions)

        elapsed_time = time.time() - start_time
        logger.info(
            f"マイニングが完了: 候補 {len(raw_pairs)}件, 解決後 {len(resolved)}件, "
            f"校正後 {len(calibrated)}件, ラベル付き {len(labeled)}行 (処理時間: {elapsed_time:.2f}秒)"
        )
        return MiningResult(
            raw_pairs=raw_pairs,
            resolved=resolved,
            calibrated=calibrated,
            stats=stats,
            labeled=labeled,
            sources=_majority_sources(raw_pairs),
        )


def _majority_sources(pairs: Iterable[MinedPair]) -> dict[tuple[str, str], str]:
    """(q, c) ごとに件数の多いソース（同数ならbacktrack）。"""
    counts: dict[tuple[str, str], Counter[str]] = defaultdict(Counter)
    for pair in pairs:
        counts[(pair.q, pair.c)][pair.source] += pair.count
    return {
        key: "backtrack" if by_source["backtrack"] >= by_source["transfer"] else "transfer"
        for key, by_source in counts.items()
    }
