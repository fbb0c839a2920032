"""Checkpoint files: parameters as float64 npz arrays plus a JSON metadata entry.

The metadata entry `__meta__` holds the format version, the architecture, the
configuration snapshot and the vocabulary (tokens and content hash), so a
checkpoint is self-contained for prediction.
"""

import json
import time
import zipfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, BinaryIO, Optional

import numpy as np

from ..text.tokenizer import Vocabulary
from ..utils.errors import CheckpointError, InputFileNotFoundError, OutputWriteError, ShapeError
from ..utils.logging_config import get_logger
from .configs import EncoderConfig, HeadConfig, LstmConfig
from .heads import EncoderClassifier, MaskedLanguageModel
from .lstm import LstmClassifier
from .params import Module


# ロガーの取得
logger = get_logger(__name__)

FORMAT_VERSION = 1
META_KEY = "__meta__"
ARCHITECTURES = ("lstm", "encoder", "encoder+head")
_ZIP_DATE_TIME = (1980, 1, 1, 0, 0, 0)

# エンコーダの重みを引き継ぐときに一致が必要な設定項目
_ENCODER_SHAPE_FIELDS = ("vocab_size", "n_layers", "hidden_dim", "n_heads", "ff_dim", "max_len")


@dataclass
class ModelCheckpoint:
    """保存されたモデル（パラメータ + 構成 + 語彙参照）。"""

    arch: str
    config: dict[str, Any]
    vocab_tokens: tuple[str, ...]
    vocab_hash: str
    params: dict[str, np.ndarray] = field(default_factory=dict)
    format_version: int = FORMAT_VERSION

    @property
    def vocab(self) -> Vocabulary:
        return Vocabulary.from_tokens(self.vocab_tokens)

    @property
    def max_len(self) -> int:
        return int(self.config["max_len"])


def model_config(model: Module) -> dict[str, Any]:
    """モデルの構成スナップショットを作る。"""
    if isinstance(model, LstmClassifier):
        return {"lstm": model.config.to_dict(), "max_len": model.config.max_len}
    if isinstance(model, EncoderClassifier):
        return {
            "encoder": model.encoder_config.to_dict(),
            "head": model.head_config.to_dict(),
            "max_len": model.encoder_config.max_len,
        }
    if isinstance(model, MaskedLanguageModel):
        return {"encoder": model.encoder_config.to_dict(), "max_len": model.encoder_config.max_len}
    raise CheckpointError(f"保存できないモデルです: {type(model).__name__}")


def checkpoint_from_model(model: Module, vocab: Vocabulary) -> ModelCheckpoint:
    return ModelCheckpoint(
        arch=model.arch,
        config=model_config(model),
        vocab_tokens=tuple(vocab.tokens),
        vocab_hash=vocab.content_hash,
        params=model.state_dict(),
    )


def _write_npz(f: BinaryIO, arrays: dict[str, np.ndarray]) -> None:
    """np.savez互換のnpzを書く。エントリの日時を固定し、同じ内容なら同じバイト列になる。"""
    with zipfile.ZipFile(f, "w", compression=zipfile.ZIP_STORED, allowZip64=True) as archive:
        for name, array in arrays.items():
            info = zipfile.ZipInfo(f"{name}.npy", date_time=_ZIP_DATE_TIME)
            with archive.open(info, "w", force_zip64=True) as member:
                np.lib.format.write_array(member, np.asanyarray(array), allow_pickle=False)


def write_checkpoint(checkpoint: ModelCheckpoint, path: str) -> None:
    """
    チェックポイントを書き出す。

    Raises:
        OutputWriteError: 書き込みに失敗した場合
    """
    start_time = time.time()
    meta = {
        "format_version": checkpoint.format_version,
        "arch": checkpoint.arch,
        "config": checkpoint.config,
        "vocab_tokens": list(checkpoint.vocab_tokens),
        "vocab_hash": checkpoint.vocab_hash,
    }
    encoded = np.frombuffer(json.dumps(meta, ensure_ascii=False).encode("utf-8"), dtype=np.uint8)
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, "wb") as f:
            _write_npz(f, {META_KEY: encoded, **checkpoint.params})
    except OSError as e:
        raise OutputWriteError(
            f"チェックポイントの書き込みに失敗しました: {path}",
            {"path": str(target), "error": str(e)}
        ) from e

    elapsed_time = time.time() - start_time
    logger.info(
        f"チェックポイントを保存: {path} (arch: {checkpoint.arch}, "
        f"パラメータ: {len(checkpoint.params)}, 処理時間: {elapsed_time:.2f}秒)"
    )


def save_checkpoint(model: Module, vocab: Vocabulary, path: str) -> ModelCheckpoint:
    checkpoint = checkpoint_from_model(model, vocab)
    write_checkpoint(checkpoint, path)
    return checkpoint


def load_checkpoint(path: str, vocab: Optional[Vocabulary] = None) -> ModelCheckpoint:
    """
    チェックポイントを読み込む。

    Args:
        path: チェックポイントファイル
        vocab: 指定した場合、チェックポイントの語彙ハッシュと一致するか検証する

    Raises:
        InputFileNotFoundError: ファイルが存在しない場合
        CheckpointError: ファイルが壊れている、または語彙が一致しない場合
    """
    source = Path(path)
    if not source.exists():
        raise InputFileNotFoundError(
            f"チェックポイントが見つかりません: {path}",
            {"file_path": str(source)}
        )

    try:
        with np.load(source, allow_pickle=False) as archive:
            if META_KEY not in archive.files:
                raise CheckpointError(
                    f"チェックポイントにメタデータがありません: {path}",
                    {"path": str(source)}
                )
            meta = json.loads(archive[META_KEY].tobytes().decode("utf-8"))
            params = {name: archive[name] for name in archive.files if name != META_KEY}
    except CheckpointError:
        raise
    except (OSError, ValueError, EOFError, KeyError, UnicodeDecodeError, zipfile.BadZipFile) as e:
        raise CheckpointError(
            f"チェックポイントを読み込めません（破損している可能性があります）: {path}",
            {"path": str(source), "error": str(e)}
        ) from e

    if meta.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(
            f"未対応のチェックポイント形式です: {meta.get('format_version')}",
            {"format_version": meta.get("format_version"), "supported": FORMAT_VERSION}
        )
    if meta.get("arch") not in ARCHITECTURES:
        raise CheckpointError(f"不明なアーキテクチャです: {meta.get('arch')}", {"arch": meta.get("arch")})

    checkpoint = ModelCheckpoint(
        arch=meta["arch"],
        config=meta["config"],
        vocab_tokens=tuple(meta["vocab_tokens"]),
        vocab_hash=meta["vocab_hash"],
        params=params,
        format_version=meta["format_version"],
    )
    stored_hash = checkpoint.vocab.content_hash
    if stored_hash != checkpoint.vocab_hash:
        raise CheckpointError(
            f"チェックポイント内の語彙がハッシュと一致しません（改ざんまたは破損）: {path}",
            {"path": str(source), "recorded_hash": checkpoint.vocab_hash, "actual_hash": stored_hash}
        )
    if vocab is not None and vocab.content_hash != checkpoint.vocab_hash:
        raise CheckpointError(
            "語彙がチェックポイントと一致しません",
            {"checkpoint_hash": checkpoint.vocab_hash, "vocab_hash": vocab.content_hash}
        )
    logger.debug(f"チェックポイントを読み込み: {path} (arch: {checkpoint.arch})")
    return checkpoint


def build_model(checkpoint: ModelCheckpoint) -> Module:
    """チェックポイントからモデルを組み立て、パラメータを読み込む。"""
    config = checkpoint.config
    model: Module
    if checkpoint.arch == "lstm":
        model = LstmClassifier(LstmConfig.from_dict(config["lstm"]))
    elif checkpoint.arch == "encoder":
        model = MaskedLanguageModel(EncoderConfig.from_dict(config["encoder"]))
    else:
        model = EncoderClassifier(
            EncoderConfig.from_dict(config["encoder"]),
            HeadConfig.from_dict(config["head"]),
        )
    model.load_state_dict(checkpoint.params)
    return model.eval()


def load_encoder_weights(model: EncoderClassifier, checkpoint: ModelCheckpoint) -> None:
    """
    事前学習済みチェックポイントのエンコーダ部分を分類モデルに読み込む。

    Raises:
        CheckpointError: エンコーダを含まないチェックポイントの場合
        ShapeError: エンコーダの構成（層数・次元など）が一致しない場合
    """
    if "encoder" not in checkpoint.config:
        raise CheckpointError(
            f"エンコーダを含まないチェックポイントです: arch={checkpoint.arch}",
            {"arch": checkpoint.arch}
        )
    saved = checkpoint.config["encoder"]
    current = model.encoder_config.to_dict()
    mismatched = [name for name in _ENCODER_SHAPE_FIELDS if saved.get(name) != current[name]]
    if mismatched:
        raise ShapeError(
            "チェックポイントのエンコーダ構成がモデルと一致しません: "
            + ", ".join(f"{name} {saved.get(name)} vs {current[name]}" for name in mismatched),
            {"checkpoint": {n: saved.get(n) for n in mismatched}, "model": {n: current[n] for n in mismatched}}
        )
    model.load_state_dict(checkpoint.params, prefix="encoder.")
