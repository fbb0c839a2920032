"""Tab-separated file reader (labeled examples, ground truth, mined pairs, gazetteer)."""

import os
import time
from typing import Callable, TypeVar

from ..utils.errors import InputFileNotFoundError, ParseError
from ..utils.logging_config import get_logger
from ..utils.models import GroundTruthPair, LabeledExample, MinedPair


# ロガーの取得
logger = get_logger(__name__)

T = TypeVar("T")

BOOL_VALUES = {"True": True, "False": False}
PAIR_SOURCES = ("backtrack", "transfer")


class TsvReader:
    """ヘッダーなしTSVファイルを読み取るクラス。"""

    def read_labeled(self, file_path: str) -> list[LabeledExample]:
        """
        `query\\tcorrection\\tis_misspelt` 形式のファイルを読み込む。

        Args:
            file_path: 読み取るTSVファイルのパス

        Returns:
            LabeledExampleのリスト（空ファイルの場合は空リスト）

        Raises:
            InputFileNotFoundError: ファイルが存在しない場合
            ParseError: 列数やラベルが不正な行がある場合
        """
        return self._read(file_path, 3, self._parse_labeled, "ラベル付きデータ")

    def read_ground_truth(self, file_path: str) -> list[GroundTruthPair]:
        """`misspelt\\tcorrection\\tsession_id` 形式の正解ファイルを読み込む。"""
        return self._read(file_path, 3, self._parse_ground_truth, "正解ペア")

    def read_pairs(self, file_path: str) -> list[MinedPair]:
        """`q\\tc\\tcount\\tsource` 形式のマイニング結果を読み込む。"""
        return self._read(file_path, 4, self._parse_pair, "マイニングペア")

    def read_gazetteer(self, file_path: str) -> list[tuple[str, float]]:
        """`entity\\tweight` 形式のガゼッティアを読み込む。"""
        return self._read(file_path, 2, self._parse_gazetteer_row, "ガゼッティア")

    def read_lines(self, file_path: str) -> list[str]:
        """1行1テキストのファイルを読み込む（改行は除去）。"""
        self._check_exists(file_path)
        with open(file_path, "r", encoding="utf-8", newline="\n") as f:
            return [line.rstrip("\n") for line in f]

    def _check_exists(self, file_path: str) -> None:
        if not os.path.exists(file_path):
            logger.error(f"ファイルが見つかりません: {file_path}")
            raise InputFileNotFoundError(
                f"指定されたファイルが見つかりません: {file_path}",
                {"file_path": file_path}
            )

    def _read(
        self,
        file_path: str,
        n_columns: int,
        parse_row: Callable[[list[str]], T],
        label: str,
    ) -> list[T]:
        logger.info(f"{label}の読み込みを開始: {file_path}")
        start_time = time.time()
        self._check_exists(file_path)

        rows: list[T] = []
        with open(file_path, "r", encoding="utf-8", newline="\n") as f:
            for line_number, line in enumerate(f, start=1):
                fields = line.rstrip("\n").split("\t")
                if len(fields) != n_columns:
                    raise ParseError(
                        f"列数が不正です（{n_columns}列が必要）: {file_path}:{line_number}",
                        {"file_path": file_path, "line_number": line_number, "columns": len(fields)}
                    )
                try:
                    rows.append(parse_row(fields))
                except ValueError as e:
                    raise ParseError(
                        f"行の解析に失敗しました: {file_path}:{line_number} ({e})",
                        {"file_path": file_path, "line_number": line_number, "error": str(e)}
                    ) from e

        elapsed_time = time.time() - start_time
        logger.info(
            f"{label}の読み込みが完了: {file_path} (行数: {len(rows)}, 処理時間: {elapsed_time:.2f}秒)"
        )
        return rows

    @staticmethod
    def _parse_labeled(fields: list[str]) -> LabeledExample:
        query, correction, flag = fields
        if not query:
            raise ValueError("クエリが空です")
        if flag not in BOOL_VALUES:
            raise ValueError(f"is_misspeltはTrue/Falseである必要があります: {flag!r}")
        return LabeledExample(query=query, correction=correction, is_misspelt=BOOL_VALUES[flag])

    @staticmethod
    def _parse_ground_truth(fields: list[str]) -> GroundTruthPair:
        misspelt, correction, session_id = fields
        if misspelt == correction:
            raise ValueError("誤りと訂正が同一です")
        return GroundTruthPair(misspelt=misspelt, correction=correction, session_id=session_id)

    @staticmethod
    def _parse_pair(fields: list[str]) -> MinedPair:
        q, c, count, source = fields
        if source not in PAIR_SOURCES:
            raise ValueError(f"不明なソースです: {source!r}")
        n = int(count)
        if n < 1:
            raise ValueError(f"countは1以上である必要があります: {n}")
        return MinedPair(q=q, c=c, count=n, source=source)

    @staticmethod
    def _parse_gazetteer_row(fields: list[str]) -> tuple[str, float]:
        entity, weight = fields
        return entity, float(weight)
