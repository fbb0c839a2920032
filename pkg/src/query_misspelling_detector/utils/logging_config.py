"""ログ設定モジュール - query-misspelling-detector CLI用のログ設定を提供します。

標準出力は予測結果や評価指標などのデータに使うため、ログはすべて標準エラーへ出力します。
"""

import logging
import os
import sys
from typing import Optional, TextIO

from .errors import ConfigurationError


# ルートロガー名
ROOT_LOGGER_NAME = "query_misspelling_detector"

# ログレベルのマッピング
LOG_LEVELS = {
    "DEBUG": logging.DEBUG,
    "INFO": logging.INFO,
    "WARNING": logging.WARNING,
    "ERROR": logging.ERROR,
    "CRITICAL": logging.CRITICAL,
}

DEFAULT_FORMAT = "%(asctime)s %(levelname)-7s %(short_name)s: %(message)s"
DATE_FORMAT = "%H:%M:%S"


class StderrHandler(logging.StreamHandler):
    """出力のたびに現在のsys.stderrへ書くハンドラー（同一プロセスでmainを繰り返し呼ぶ場合に対応）。"""

    def __init__(self) -> None:
        super().__init__(sys.stderr)

    @property  # type: ignore[override]
    def stream(self) -> TextIO:
        return sys.stderr

    @stream.setter
    def stream(self, value: TextIO) -> None:
        pass


class ShortNameFormatter(logging.Formatter):
    """ロガー名からパッケージ名の接頭辞を除いた `short_name` を使えるようにする。"""

    def format(self, record: logging.LogRecord) -> str:
        name = record.name
        if name.startswith(ROOT_LOGGER_NAME + "."):
            name = name[len(ROOT_LOGGER_NAME) + 1:]
        record.short_name = name
        return super().format(record)


def resolve_level(level: str) -> int:
    """
    ログレベル名を数値に変換する。

    Raises:
        ConfigurationError: 不明なレベル名の場合
    """
    name = str(level).upper()
    if name not in LOG_LEVELS:
        raise ConfigurationError(
            f"不正なログレベルです: {level}",
            {"log_level": level, "available": list(LOG_LEVELS)}
        )
    return LOG_LEVELS[name]


def setup_logging(
    name: str = ROOT_LOGGER_NAME,
    level: Optional[str] = None,
    format_string: Optional[str] = None,
) -> logging.Logger:
    """
    ログ設定を初期化し、ロガーを返します。

    Args:
        name: ロガー名
        level: ログレベル（Noneの場合は環境変数QMD_LOG_LEVEL、未設定・不正ならINFO）
        format_string: ログフォーマット文字列（`short_name` を参照できる）

    Returns:
        設定済みのロガーインスタンス
    """
    if level is None:
        level = os.environ.get("QMD_LOG_LEVEL", "INFO")
    log_level = LOG_LEVELS.get(level.upper(), logging.INFO)

    logger = logging.getLogger(name)
    logger.setLevel(log_level)

    # 既存のハンドラーをクリア（重複を避けるため）
    logger.handlers.clear()

    handler = StderrHandler()
    handler.setLevel(log_level)
    handler.setFormatter(ShortNameFormatter(format_string or DEFAULT_FORMAT, datefmt=DATE_FORMAT))
    logger.addHandler(handler)
    logger.propagate = False

    return logger


def get_logger(name: str) -> logging.Logger:
    """
    指定された名前のロガーを取得します。

    Args:
        name: ロガー名（通常は__name__を使用）
    """
    if not logging.getLogger(ROOT_LOGGER_NAME).handlers:
        setup_logging()
    return logging.getLogger(name)


def set_log_level(level: str) -> None:
    """
    パッケージ全体のログレベルを変更します（--log-level と設定ファイルのlog_level）。

    Raises:
        ConfigurationError: 不明なレベル名の場合
    """
    log_level = resolve_level(level)
    root_logger = logging.getLogger(ROOT_LOGGER_NAME)
    root_logger.setLevel(log_level)
    for handler in root_logger.handlers:
        handler.setLevel(log_level)
