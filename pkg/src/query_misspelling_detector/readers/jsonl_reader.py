"""JSON-lines reader (session logs, training histories)."""

import json
import os
import time
from typing import Any, Iterator

from ..utils.errors import InputFileNotFoundError, ParseError
from ..utils.logging_config import get_logger
from ..utils.models import KeystrokeSession


# ロガーの取得
logger = get_logger(__name__)


def _validate_session(session: KeystrokeSession) -> None:
    if not session.snapshots:
        raise ValueError("スナップショットが空です")
    ticks = [tick for tick, _ in session.snapshots]
    if any(b <= a for a, b in zip(ticks, ticks[1:])):
        raise ValueError("スナップショットの時刻が狭義単調増加ではありません")


class JsonlReader:
    """JSON-linesファイルを読み取るクラス。"""

    def iter_records(self, file_path: str) -> Iterator[tuple[int, dict[str, Any]]]:
        """
        (行番号, レコード) を順に返す。空行は読み飛ばす。

        Raises:
            InputFileNotFoundError: ファイルが存在しない場合
            ParseError: JSONとして不正な行がある場合
        """
        if not os.path.exists(file_path):
            logger.error(f"ファイルが見つかりません: {file_path}")
            raise InputFileNotFoundError(
                f"指定されたファイルが見つかりません: {file_path}",
                {"file_path": file_path}
            )
        with open(file_path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ParseError(
                        f"JSONの解析に失敗しました: {file_path}:{line_number}",
                        {"file_path": file_path, "line_number": line_number, "error": str(e)}
                    ) from e
                if not isinstance(record, dict):
                    raise ParseError(
                        f"各行はJSONオブジェクトである必要があります: {file_path}:{line_number}",
                        {"file_path": file_path, "line_number": line_number}
                    )
                yield line_number, record

    def read_records(self, file_path: str) -> list[dict[str, Any]]:
        """すべてのレコードを読み込む。"""
        return [record for _, record in self.iter_records(file_path)]

    def read_sessions(self, file_path: str) -> list[KeystrokeSession]:
        """
        セッションログを読み込む。

        Raises:
            ParseError: フィールドの欠落、型の不一致、時刻の逆転がある場合
        """
        logger.info(f"セッションログの読み込みを開始: {file_path}")
        start_time = time.time()

        sessions: list[KeystrokeSession] = []
        for line_number, record in self.iter_records(file_path):
            try:
                session = KeystrokeSession.from_dict(record)
                _validate_session(session)
            except (KeyError, TypeError, ValueError, IndexError) as e:
                raise ParseError(
                    f"セッションの形式が不正です: {file_path}:{line_number} ({e})",
                    {"file_path": file_path, "line_number": line_number, "error": str(e)}
                ) from e
            sessions.append(session)

        elapsed_time = time.time() - start_time
        logger.info(
            f"セッションログの読み込みが完了: {file_path} "
            f"(セッション数: {len(sessions)}, 処理時間: {elapsed_time:.2f}秒)"
        )
        return sessions
