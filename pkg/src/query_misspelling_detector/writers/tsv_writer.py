"""Tab-separated file writer."""

import time
from pathlib import Path
from typing import Iterable

from ..utils.errors import OutputWriteError, ValidationError
from ..utils.logging_config import get_logger
from ..utils.models import GroundTruthPair, LabeledExample, MinedPair


# ロガーの取得
logger = get_logger(__name__)


def _check_field(value: str) -> str:
    """タブ・改行を含むフィールドはTSVで表現できない。"""
    if "\t" in value or "\n" in value or "\r" in value:
        raise ValidationError(
            f"フィールドにタブまたは改行が含まれています: {value!r}",
            {"value": value}
        )
    return value


class TsvWriter:
    """ヘッダーなしTSVファイルを生成するクラス。"""

    def write_labeled(self, examples: Iterable[LabeledExample], output_path: str) -> int:
        """
        `query\\tcorrection\\tis_misspelt` 形式で書き出す。

        Args:
            examples: 書き出すLabeledExample
            output_path: 出力先のパス

        Returns:
            書き出した行数

        Raises:
            OutputWriteError: 書き込みに失敗した場合
        """
        rows = ((e.query, e.correction, str(e.is_misspelt)) for e in examples)
        return self._write(rows, output_path, "ラベル付きデータ")

    def write_ground_truth(self, pairs: Iterable[GroundTruthPair], output_path: str) -> int:
        """`misspelt\\tcorrection\\tsession_id` 形式で書き出す。"""
        rows = ((p.misspelt, p.correction, p.session_id) for p in pairs)
        return self._write(rows, output_path, "正解ペア")

    def write_pairs(self, pairs: Iterable[MinedPair], output_path: str) -> int:
        """`q\\tc\\tcount\\tsource` 形式で書き出す。"""
        rows = ((p.q, p.c, str(p.count), p.source) for p in pairs)
        return self._write(rows, output_path, "マイニングペア")

    def write_gazetteer(self, entities: Iterable[tuple[str, float]], output_path: str) -> int:
        """`entity\\tweight` 形式で書き出す（重みはreprで完全に往復できる形式）。"""
        rows = ((entity, repr(float(weight))) for entity, weight in entities)
        return self._write(rows, output_path, "ガゼッティア")

    def write_lines(self, lines: Iterable[str], output_path: str) -> int:
        """1行1テキストで書き出す。"""
        return self._write(((line,) for line in lines), output_path, "テキスト")

    def _write(self, rows: Iterable[tuple[str, ...]], output_path: str, label: str) -> int:
        logger.info(f"{label}の書き込みを開始: {output_path}")
        start_time = time.time()
        target = Path(output_path)
        count = 0
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            with open(target, "w", encoding="utf-8", newline="\n") as f:
                for row in rows:
                    f.write("\t".join(_check_field(value) for value in row) + "\n")
                    count += 1
        except OSError as e:
            logger.error(f"書き込みに失敗しました: {output_path}: {e}")
            raise OutputWriteError(
                f"ファイルの書き込みに失敗しました: {output_path}",
                {"path": str(target), "error": str(e)}
            ) from e

        elapsed_time = time.time() - start_time
        logger.info(
            f"{label}の書き込みが完了: {output_path} (行数: {count}, 処理時間: {elapsed_time:.2f}秒)"
        )
        return count
