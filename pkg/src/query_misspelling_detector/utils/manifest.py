"""Reproducibility manifests for mutating commands."""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .. import __version__
from .errors import HashMismatchError, InputFileNotFoundError, OutputWriteError
from .logging_config import get_logger


logger = get_logger(__name__)


@dataclass
class RunManifest:
    """1コマンド実行の再現性マニフェスト。"""

    command_line: list[str]
    config: dict[str, Any]
    seeds: dict[str, int]
    inputs: dict[str, str] = field(default_factory=dict)
    outputs: dict[str, str] = field(default_factory=dict)
    tool_version: str = __version__
    wall_time_seconds: float = 0.0


def file_sha256(path: str | os.PathLike[str]) -> str:
    """ファイル内容のSHA-256を返す。"""
    digest = hashlib.sha256()
    try:
        with open(path, "rb") as f:
            for chunk in iter(lambda: f.read(1 << 20), b""):
                digest.update(chunk)
    except FileNotFoundError:
        raise InputFileNotFoundError(
            f"ファイルが見つかりません: {path}",
            {"file_path": str(path)}
        )
    return digest.hexdigest()


def hash_paths(paths: list[str]) -> dict[str, str]:
    """ファイル（ディレクトリの場合は配下の全ファイル）のハッシュを集める。"""
    hashes: dict[str, str] = {}
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            for child in sorted(p for p in path.rglob("*") if p.is_file()):
                if child.name.endswith("manifest.json"):
                    continue
                hashes[str(child)] = file_sha256(child)
        else:
            hashes[str(path)] = file_sha256(path)
    return hashes


def manifest_path_for(out: str) -> Path:
    """出力先からマニフェストのパスを決める。"""
    path = Path(out)
    if path.is_dir():
        return path / "manifest.json"
    return path.with_name(path.name + ".manifest.json")


def write_manifest(manifest: RunManifest, out: str) -> Path:
    """マニフェストをJSONで書き出す。"""
    target = manifest_path_for(out)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "w", encoding="utf-8") as f:
            json.dump(asdict(manifest), f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise OutputWriteError(
            f"マニフェストの書き込みに失敗しました: {target}",
            {"path": str(target), "error": str(e)}
        ) from e
    logger.debug(f"マニフェストを書き込み: {target}")
    return target


def verify_inputs(manifest_file: str, inputs: list[str]) -> None:
    """
    入力ファイルのハッシュを既存マニフェストの出力ハッシュと照合する。

    Raises:
        HashMismatchError: マニフェストに記録された値と一致しない場合
    """
    path = Path(manifest_file)
    if not path.exists():
        raise InputFileNotFoundError(
            f"マニフェストが見つかりません: {manifest_file}",
            {"file_path": str(path)}
        )
    with open(path, "r", encoding="utf-8") as f:
        recorded: dict[str, str] = json.load(f).get("outputs", {})

    by_name = {Path(p).name: digest for p, digest in recorded.items()}
    for input_path, actual in hash_paths(inputs).items():
        expected = recorded.get(input_path) or by_name.get(Path(input_path).name)
        if expected is None:
            continue
        if expected != actual:
            raise HashMismatchError(
                f"入力ファイルのハッシュがマニフェストと一致しません: {input_path}",
                {"file_path": input_path, "expected": expected, "actual": actual}
            )
    logger.info(f"マニフェストとの照合が完了: {manifest_file}")
