"""GloVe-style text embedding reader (`word v1 ... vd` per line)."""

import os
import time
from typing import Container, Optional

import numpy as np

from ..utils.errors import InputFileNotFoundError, ParseError
from ..utils.logging_config import get_logger


# ロガーの取得
logger = get_logger(__name__)


class EmbeddingReader:
    """単語ベクトルのテキストファイルを読み取るクラス。"""

    def read_file(
        self,
        file_path: str,
        keep: Optional[Container[str]] = None,
    ) -> tuple[dict[str, np.ndarray], int]:
        """
        単語ベクトルを読み込む。次元はファイルの最初の行から決まる。

        Args:
            file_path: 読み取るファイルのパス
            keep: 指定した場合、含まれる単語のベクトルだけを保持する（次元の検査は全行）

        Returns:
            (単語 -> float64ベクトル, 次元)

        Raises:
            InputFileNotFoundError: ファイルが存在しない場合
            ParseError: 次元が行ごとに異なる、または数値でない値がある場合
        """
        logger.info(f"埋め込みファイルの読み込みを開始: {file_path}")
        start_time = time.time()

        if not os.path.exists(file_path):
            logger.error(f"ファイルが見つかりません: {file_path}")
            raise InputFileNotFoundError(
                f"指定されたファイルが見つかりません: {file_path}",
                {"file_path": file_path}
            )

        vectors: dict[str, np.ndarray] = {}
        dim: Optional[int] = None
        with open(file_path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                fields = line.rstrip("\n").rstrip(" ").split(" ")
                if fields == [""]:
                    continue
                word, values = fields[0], fields[1:]
                if not values:
                    raise ParseError(
                        f"ベクトルがありません: {file_path}:{line_number}",
                        {"file_path": file_path, "line_number": line_number}
                    )
                if dim is None:
                    dim = len(values)
                elif len(values) != dim:
                    raise ParseError(
                        f"ベクトルの次元が一致しません（{dim}が必要、{len(values)}が見つかりました）: "
                        f"{file_path}:{line_number}",
                        {
                            "file_path": file_path,
                            "line_number": line_number,
                            "expected_dim": dim,
                            "actual_dim": len(values),
                        }
                    )
                if keep is not None and word not in keep:
                    continue
                try:
                    vectors[word] = np.array([float(v) for v in values], dtype=np.float64)
                except ValueError as e:
                    raise ParseError(
                        f"数値でない値が含まれています: {file_path}:{line_number}",
                        {"file_path": file_path, "line_number": line_number, "error": str(e)}
                    ) from e

        if dim is None:
            raise ParseError(f"埋め込みファイルが空です: {file_path}", {"file_path": file_path})

        elapsed_time = time.time() - start_time
        logger.info(
            f"埋め込みファイルの読み込みが完了: {file_path} "
            f"(単語数: {len(vectors)}, 次元: {dim}, 処理時間: {elapsed_time:.2f}秒)"
        )
        return vectors, dim
