"""Scripted keystroke sessions and sharded log generation.

Each session follows one behavior:

- clean: progressive prefixes of the entity, engaged.
- self_correct: prefixes of a typo'd query, backspace to the common prefix,
  retype the entity, engaged.
- select: prefixes of a typo'd query, the entity is picked from autocomplete.
- transfer: prefixes of a typo'd query, the search system rewrites it to the
  entity; nothing is engaged.
- reformulation: another entity typed in full, erased, then the entity is
  typed and engaged.

Typo behaviors carry a ground-truth pair; clean and reformulation do not.
"""

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..readers.tsv_reader import TsvReader
from ..utils.errors import ConfigurationError, OutputWriteError, ValidationError
from ..utils.logging_config import get_logger
from ..utils.models import GroundTruthPair, KeystrokeSession, SessionBatch
from ..writers.jsonl_writer import JsonlWriter
from ..writers.tsv_writer import TsvWriter
from .gazetteer import Gazetteer
from .typo_channel import TypoChannel, inject_typo


logger = get_logger(__name__)

BEHAVIORS = ("clean", "self_correct", "select", "transfer", "reformulation")
TYPO_BEHAVIORS = ("self_correct", "select", "transfer")

SESSIONS_FILE = "sessions.jsonl"
GROUND_TRUTH_FILE = "ground_truth.tsv"
GAZETTEER_FILE = "gazetteer.tsv"

# エンティティの接頭辞になるタイプミス（末尾の削除など）は途中入力と区別できないため引き直す
MAX_TYPO_DRAWS = 10


@dataclass(frozen=True)
class SessionBehavior:
    """セッションの振る舞いの分布。"""

    typo_rate: float = 0.2
    self_correct_share: float = 0.5
    transfer_share: float = 0.15
    reformulation_share: float = 0.05
    mode: Optional[str] = None  # 指定した場合はその振る舞いに固定

    def __post_init__(self) -> None:
        for name in ("typo_rate", "self_correct_share", "transfer_share", "reformulation_share"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigurationError(f"{name}は[0, 1]の範囲である必要があります", {name: value})
        if self.self_correct_share + self.transfer_share > 1.0 + 1e-12:
            raise ConfigurationError(
                "self_correct_shareとtransfer_shareの合計は1以下である必要があります",
                {"self_correct_share": self.self_correct_share, "transfer_share": self.transfer_share}
            )
        if self.mode is not None and self.mode not in BEHAVIORS:
            raise ConfigurationError(f"不明な振る舞いです: {self.mode}", {"mode": self.mode})

    def choose(self, rng: np.random.Generator) -> str:
        """振る舞いを1つ選ぶ（乱数の消費量は常に一定）。"""
        u, v = rng.random(), rng.random()
        if self.mode is not None:
            return self.mode
        if u < self.typo_rate:
            if v < self.transfer_share:
                return "transfer"
            if v < self.transfer_share + self.self_correct_share:
                return "self_correct"
            return "select"
        if v < self.reformulation_share:
            return "reformulation"
        return "clean"


def _prefixes(text: str) -> list[str]:
    return [text[:i] for i in range(1, len(text) + 1)]


def _ticked(texts: Sequence[str]) -> list[tuple[int, str]]:
    return [(tick, text) for tick, text in enumerate(texts)]


def _common_prefix_len(a: str, b: str) -> int:
    n = 0
    for x, y in zip(a, b):
        if x != y:
            break
        n += 1
    return n


def build_clean_session(session_id: str, entity: str) -> KeystrokeSession:
    return KeystrokeSession(session_id, _ticked(_prefixes(entity)), engagement=entity)


def build_self_correct_session(session_id: str, entity: str, typo: str) -> KeystrokeSession:
    """タイプミスを打ち切った後、共通接頭辞まで消して打ち直す。"""
    keep = _common_prefix_len(typo, entity)
    texts = _prefixes(typo)
    texts.extend(typo[:i] for i in range(len(typo) - 1, keep - 1, -1) if i > 0)
    texts.extend(entity[:i] for i in range(keep + 1, len(entity) + 1))
    return KeystrokeSession(session_id, _ticked(texts), engagement=entity)


def build_select_session(session_id: str, entity: str, typo: str) -> KeystrokeSession:
    return KeystrokeSession(session_id, _ticked(_prefixes(typo)), engagement=entity)


def build_transfer_session(session_id: str, entity: str, typo: str) -> KeystrokeSession:
    return KeystrokeSession(
        session_id,
        _ticked(_prefixes(typo)),
        engagement=None,
        transfer_correction=(typo, entity),
    )


def build_reformulation_session(session_id: str, entity: str, other: str) -> KeystrokeSession:
    """別のエンティティを入力してから消し、目的のエンティティを入力する。"""
    texts = _prefixes(other)
    texts.extend(other[:i] for i in range(len(other) - 1, 0, -1))
    texts.extend(_prefixes(entity))
    return KeystrokeSession(session_id, _ticked(texts), engagement=entity)


def _draw_typo(entity: str, channel: TypoChannel, rng: np.random.Generator) -> Optional[str]:
    for _ in range(MAX_TYPO_DRAWS):
        typo, _ = inject_typo(entity, channel, rng)
        if not entity.startswith(typo):
            return typo
    return None


def simulate_session(
    entity: str,
    channel: TypoChannel,
    behavior: SessionBehavior,
    seed: int | np.random.Generator,
    session_id: Optional[str] = None,
    alternatives: Sequence[str] = (),
) -> tuple[KeystrokeSession, Optional[GroundTruthPair]]:
    """
    1セッションをシミュレートする。

    Args:
        entity: 空でない正規化済みエンティティ（エンゲージ先）
        channel: タイプミスチャネル
        behavior: 振る舞いの分布
        seed: 乱数シードまたはGenerator
        session_id: セッションID（省略時は "s-<seed>"）
        alternatives: reformulationで最初に入力する候補エンティティ

    Returns:
        (セッション, 正解ペアまたはNone)

    Raises:
        ValidationError: エンティティが空の場合
        InapplicableChannelError: タイプミスを注入できない場合
    """
    if not entity:
        raise ValidationError("エンティティが空です")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    sid = session_id if session_id is not None else f"s-{seed}"

    kind = behavior.choose(rng)

    if kind in TYPO_BEHAVIORS:
        typo = _draw_typo(entity, channel, rng)
        if typo is None:
            logger.debug(f"接頭辞にならないタイプミスを生成できないためクリーンセッションにします: {entity!r}")
            return build_clean_session(sid, entity), None
        builders = {
            "self_correct": build_self_correct_session,
            "select": build_select_session,
            "transfer": build_transfer_session,
        }
        session = builders[kind](sid, entity, typo)
        return session, GroundTruthPair(misspelt=typo, correction=entity, session_id=sid)

    if kind == "reformulation":
        others = [a for a in alternatives if a and a != entity]
        if others:
            other = others[int(rng.integers(len(others)))]
            return build_reformulation_session(sid, entity, other), None

    return build_clean_session(sid, entity), None


def generate_shard(
    gazetteer: Gazetteer,
    channel: TypoChannel,
    behavior: SessionBehavior,
    seed: int,
    shard_index: int,
    start: int,
    count: int,
) -> SessionBatch:
    """
    1シャード分のセッションを生成する。シャードの乱数は (seed, shard_index) から決まる。
    """
    rng = np.random.default_rng([seed, shard_index])
    batch = SessionBatch()
    for offset in range(count):
        entity = gazetteer.entities[gazetteer.sample_index(rng)]
        other = gazetteer.entities[gazetteer.sample_index(rng)]
        session_seed = int(rng.integers(0, 2**63 - 1))
        session, pair = simulate_session(
            entity,
            channel,
            behavior,
            np.random.default_rng(session_seed),
            session_id=f"s{start + offset:08d}",
            alternatives=(other,),
        )
        batch.sessions.append(session)
        if pair is not None:
            batch.ground_truth.append(pair)
    return batch


def _generate_shard_args(args: tuple) -> SessionBatch:
    return generate_shard(*args)


def generate_sessions(
    gazetteer: Gazetteer,
    channel: TypoChannel,
    behavior: SessionBehavior,
    n_sessions: int,
    seed: int,
    shard_size: int = 1000,
    workers: int = 1,
) -> SessionBatch:
    """
    全シャードを生成して順番に連結する（結果はワーカー数に依存しない）。

    Raises:
        ConfigurationError: n_sessionsまたはshard_sizeが1未満の場合
    """
    if n_sessions < 1:
        raise ConfigurationError("n_sessionsは1以上である必要があります", {"n_sessions": n_sessions})
    if shard_size < 1:
        raise ConfigurationError("shard_sizeは1以上である必要があります", {"shard_size": shard_size})

    tasks = [
        (gazetteer, channel, behavior, seed, index, start, min(shard_size, n_sessions - start))
        for index, start in enumerate(range(0, n_sessions, shard_size))
    ]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            batches = list(executor.map(_generate_shard_args, tasks))
    else:
        batches = [_generate_shard_args(task) for task in tasks]

    merged = SessionBatch()
    for batch in batches:
        merged.sessions.extend(batch.sessions)
        merged.ground_truth.extend(batch.ground_truth)
    return merged


def generate_log(
    gazetteer: Gazetteer,
    channel: TypoChannel,
    behavior: SessionBehavior,
    n_sessions: int,
    seed: int,
    out_dir: str,
    shard_size: int = 1000,
    workers: int = 1,
) -> tuple[Path, Path]:
    """
    セッションログ（JSON-lines）と正解ペア（TSV）を書き出す。ガゼッティアも併せて保存する。

    Args:
        gazetteer: エンゲージ先のエンティティ集合
        channel: タイプミスチャネル
        behavior: 振る舞いの分布
        n_sessions: セッション数（1以上）
        seed: 乱数シード
        out_dir: 出力ディレクトリ
        shard_size: 1シャードあたりのセッション数
        workers: 並列ワーカー数

    Returns:
        (セッションファイルのパス, 正解ファイルのパス)

    Raises:
        OutputWriteError: 出力先に書き込めない場合
    """
    logger.info(f"セッションログの生成を開始: {n_sessions}セッション (seed={seed}, workers={workers})")
    start_time = time.time()

    target = Path(out_dir)
    try:
        target.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OutputWriteError(
            f"出力ディレクトリを作成できません: {out_dir}",
            {"path": str(target), "error": str(e)}
        ) from e

    batch = generate_sessions(gazetteer, channel, behavior, n_sessions, seed, shard_size, workers)

    sessions_path = target / SESSIONS_FILE
    truth_path = target / GROUND_TRUTH_FILE
    JsonlWriter().write_sessions(batch.sessions, str(sessions_path))
    tsv = TsvWriter()
    tsv.write_ground_truth(batch.ground_truth, str(truth_path))
    tsv.write_gazetteer(zip(gazetteer.entities, gazetteer.weights), str(target / GAZETTEER_FILE))

    elapsed_time = time.time() - start_time
    logger.info(
        f"セッションログの生成が完了: {out_dir} "
        f"(セッション数: {len(batch.sessions)}, 正解ペア数: {len(batch.ground_truth)}, "
        f"処理時間: {elapsed_time:.2f}秒)"
    )
    return sessions_path, truth_path


def load_gazetteer(file_path: str) -> Gazetteer:
    """generate_logが保存したガゼッティアを読み込む。"""
    rows = TsvReader().read_gazetteer(file_path)
    return Gazetteer(
        entities=tuple(entity for entity, _ in rows),
        weights=tuple(weight for _, weight in rows),
    )
