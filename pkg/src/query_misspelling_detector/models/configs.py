"""Architecture configurations for the LSTM, encoder and classification head."""

from dataclasses import asdict, dataclass
from typing import Any, Optional

from ..utils.errors import ConfigurationError


POOLING_STRATEGIES = ("last_layer_cls", "avg_last4_cls")
AVG_POOL_LAYERS = 4


@dataclass(frozen=True)
class LstmConfig:
    """単方向LSTM分類器の設定。"""

    vocab_size: int
    embed_dim: int = 50
    hidden_dim: int = 50
    max_len: int = 32
    embeddings_trainable: bool = True
    external_embeddings: Optional[str] = None

    def __post_init__(self) -> None:
        for name in ("vocab_size", "embed_dim", "hidden_dim", "max_len"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name}は1以上である必要があります", {name: getattr(self, name)})

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "LstmConfig":
        return cls(**data)


@dataclass(frozen=True)
class EncoderConfig:
    """Transformerエンコーダの設定（full: 8層, slim: 4層）。"""

    vocab_size: int
    n_layers: int = 8
    hidden_dim: int = 128
    n_heads: int = 4
    ff_dim: int = 512
    max_len: int = 32
    dropout_p: float = 0.1

    def __post_init__(self) -> None:
        for name in ("vocab_size", "n_layers", "hidden_dim", "n_heads", "ff_dim", "max_len"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name}は1以上である必要があります", {name: getattr(self, name)})
        if self.hidden_dim % self.n_heads != 0:
            raise ConfigurationError(
                "hidden_dimはn_headsで割り切れる必要があります",
                {"hidden_dim": self.hidden_dim, "n_heads": self.n_heads}
            )
        if self.max_len < 2:
            raise ConfigurationError("max_lenは2以上である必要があります", {"max_len": self.max_len})
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigurationError("dropout_pは[0, 1)の範囲である必要があります", {"dropout_p": self.dropout_p})

    @property
    def head_dim(self) -> int:
        return self.hidden_dim // self.n_heads

    @classmethod
    def preset(cls, name: str, vocab_size: int, encoder: dict[str, Any], max_len: int) -> "EncoderConfig":
        """設定ファイルのencoderセクションから "full" / "slim" プリセットを作る。"""
        if name not in ("full", "slim"):
            raise ConfigurationError(f"不明なエンコーダプリセットです: {name}", {"preset": name})
        return cls(
            vocab_size=vocab_size,
            n_layers=encoder[f"{name}_layers"],
            hidden_dim=encoder["hidden_dim"],
            n_heads=encoder["n_heads"],
            ff_dim=encoder["ff_dim"],
            max_len=max_len,
            dropout_p=encoder["dropout_p"],
        )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "EncoderConfig":
        return cls(**data)


@dataclass(frozen=True)
class HeadConfig:
    """分類ヘッドの設定。"""

    pooling: str = "last_layer_cls"
    dropout_p: float = 0.3
    encoder_frozen: bool = False

    def __post_init__(self) -> None:
        if self.pooling not in POOLING_STRATEGIES:
            raise ConfigurationError(f"不明なプーリング戦略です: {self.pooling}", {"pooling": self.pooling})
        if not 0.0 <= self.dropout_p < 1.0:
            raise ConfigurationError("dropout_pは[0, 1)の範囲である必要があります", {"dropout_p": self.dropout_p})

    def validate_for(self, n_layers: int) -> None:
        """
        Raises:
            ConfigurationError: avg_last4_clsで層数が4未満の場合
        """
        if self.pooling == "avg_last4_cls" and n_layers < AVG_POOL_LAYERS:
            raise ConfigurationError(
                f"avg_last4_clsには{AVG_POOL_LAYERS}層以上のエンコーダが必要です",
                {"pooling": self.pooling, "n_layers": n_layers}
            )

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "HeadConfig":
        return cls(**data)
