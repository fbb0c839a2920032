"""JSON-lines writer (session logs, training histories)."""

import json
import time
from pathlib import Path
from typing import Any, Iterable

from ..utils.errors import OutputWriteError
from ..utils.logging_config import get_logger
from ..utils.models import KeystrokeSession


# ロガーの取得
logger = get_logger(__name__)


def dumps_line(record: dict[str, Any]) -> str:
    """1レコードを1行のJSONに変換する（非ASCIIはそのまま出力）。"""
    return json.dumps(record, ensure_ascii=False, separators=(", ", ": "))


class JsonlWriter:
    """JSON-linesファイルを生成するクラス。"""

    def write_sessions(self, sessions: Iterable[KeystrokeSession], output_path: str) -> int:
        """セッションを1行1セッションで書き出す。"""
        return self.write_records((s.to_dict() for s in sessions), output_path)

    def write_records(self, records: Iterable[dict[str, Any]], output_path: str) -> int:
        """
        辞書の列を書き出す。

        Args:
            records: 書き出すレコード
            output_path: 出力先のパス

        Returns:
            書き出した行数

        Raises:
            OutputWriteError: 書き込みに失敗した場合
        """
        logger.info(f"JSON-linesの書き込みを開始: {output_path}")
        start_time = time.time()
        target = Path(output_path)
        count = 0
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8", newline="\n") as f:
                for record in records:
                    f.write(dumps_line(record) + "\n")
                    count += 1
        except OSError as e:
            logger.error(f"書き込みに失敗しました: {output_path}: {e}")
            raise OutputWriteError(
                f"ファイルの書き込みに失敗しました: {output_path}",
                {"path": str(target), "error": str(e)}
            ) from e

        elapsed_time = time.time() - start_time
        logger.info(
            f"JSON-linesの書き込みが完了: {output_path} (行数: {count}, 処理時間: {elapsed_time:.2f}秒)"
        )
        return count
