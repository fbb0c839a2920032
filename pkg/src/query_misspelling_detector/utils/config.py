"""Configuration management for the query misspelling detector."""

import copy
import json
import os
from pathlib import Path
from typing import Any

from .errors import ConfigurationError


def _deep_merge(base: dict[str, Any], update: dict[str, Any]) -> dict[str, Any]:
    """ネストされた辞書を再帰的にマージする（Noneの値は無視）。"""
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


class Config:
    """Configuration manager holding the desk-scale presets."""

    DEFAULT_CONFIG: dict[str, Any] = {
        "seed": 42,
        "shards": 1,
        "log_level": "INFO",
        "normalizer": {
            "strip_diacritics": False,
        },
        "synth": {
            "n_entities": 2000,
            "n_sessions": 20000,
            "typo_rate": 0.2,
            "zipf_exponent": 1.1,
            "max_edits": 2,
            "extra_edit_prob": 0.25,
            "op_probabilities": {
                "substitution": 0.35,
                "transposition": 0.2,
                "deletion": 0.2,
                "insertion": 0.15,
                "space": 0.1,
            },
            "self_correct_share": 0.5,
            "transfer_share": 0.15,
            "reformulation_share": 0.05,
            "shard_size": 1000,
            "general_lines": 25000,
        },
        "miner": {
            "min_dist": 1,
            "max_rel_dist": 0.4,
            "min_lcs_rel": 0.5,
            "length_gate": 0.8,
            "theta": 0.5,
        },
        "dataset": {
            "finetune": {"train_n": 18000, "dev_n": 1000, "test_n": 1000, "misspell_ratio": 0.2},
            "pretrain": {"train_n": 50000, "dev_n": 0, "test_n": 0, "misspell_ratio": 0.5},
        },
        "vocab": {
            "word_max_size": 30000,
            "subword_size": 4000,
            "n_merges_cap": 10000,
            "max_len": 32,
        },
        "lstm": {
            "embed_dim": 50,
            "hidden_dim": 50,
        },
        "encoder": {
            "hidden_dim": 128,
            "n_heads": 4,
            "ff_dim": 512,
            "full_layers": 8,
            "slim_layers": 4,
            "dropout_p": 0.1,
        },
        "head": {
            "pooling": "last_layer_cls",
            "dropout_p": 0.3,
        },
        "training": {
            "pretrain_dev_fraction": 0.02,
            "presets": {
                "pretrain": {"max_epochs": 10, "batch_size": 128, "lr": 1e-3},
                "finetune": {"max_epochs": 4, "batch_size": 32, "lr": 3e-5},
                "finetune_long": {"max_epochs": 10, "batch_size": 32, "lr": 1e-5},
                "roberta_style": {"max_epochs": 6, "batch_size": 128, "lr": 3e-5},
                "supervised": {"max_epochs": 4, "batch_size": 32, "lr": 1e-4},
                "lstm": {"max_epochs": 10, "batch_size": 32, "lr": 1e-3},
            },
        },
    }

    def __init__(self, config_path: str | None = None, overrides: dict[str, Any] | None = None):
        """
        Initialize configuration.

        Args:
            config_path: Optional path to a JSON configuration file
            overrides: Optional nested dict applied last (command-line flags)
        """
        self._config = copy.deepcopy(self.DEFAULT_CONFIG)

        # 環境変数 < 設定ファイル < フラグ の順に上書き
        self._load_from_env()

        if config_path:
            self._load_from_file(config_path)

        if overrides:
            self._config = _deep_merge(self._config, overrides)

        self._validate()

    def _load_from_file(self, config_path: str) -> None:
        """Load configuration from a JSON file."""
        path = Path(config_path).expanduser()

        if not path.exists():
            raise ConfigurationError(
                f"設定ファイルが見つかりません: {config_path}",
                {"path": str(path)}
            )

        try:
            with open(path, "r", encoding="utf-8") as f:
                file_config = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(
                f"設定ファイルのJSONが不正です: {config_path}",
                {"error": str(e)}
            )
        except OSError as e:
            raise ConfigurationError(
                f"設定ファイルの読み込みに失敗しました: {config_path}",
                {"error": str(e)}
            )

        if not isinstance(file_config, dict):
            raise ConfigurationError(
                f"設定ファイルのトップレベルはオブジェクトである必要があります: {config_path}",
                {"path": str(path)}
            )
        self._config = _deep_merge(self._config, file_config)

    def _load_from_env(self) -> None:
        """Load configuration from environment variables."""
        env_mappings = {
            "QMD_LOG_LEVEL": "log_level",
            "QMD_SEED": ("seed", int),
            "QMD_SHARDS": ("shards", int),
        }

        for env_var, config_key in env_mappings.items():
            value = os.environ.get(env_var)
            if value:
                if isinstance(config_key, tuple):
                    key, converter = config_key
                    try:
                        self._config[key] = converter(value)
                    except ValueError:
                        raise ConfigurationError(
                            f"環境変数の値が不正です: {env_var}={value}",
                            {"env_var": env_var, "value": value}
                        )
                else:
                    self._config[config_key] = value

    def _validate(self) -> None:
        """Validate configuration values."""
        if self._config["seed"] < 0:
            raise ConfigurationError("seed must be non-negative", {"seed": self._config["seed"]})

        if self._config["shards"] <= 0:
            raise ConfigurationError("shards must be positive", {"shards": self._config["shards"]})

        synth = self._config["synth"]
        if not 0.0 <= synth["typo_rate"] <= 1.0:
            raise ConfigurationError("synth.typo_rate must be in [0, 1]", {"typo_rate": synth["typo_rate"]})
        if synth["max_edits"] < 1:
            raise ConfigurationError("synth.max_edits must be >= 1", {"max_edits": synth["max_edits"]})
        if synth["shard_size"] <= 0:
            raise ConfigurationError("synth.shard_size must be positive")

        miner = self._config["miner"]
        if not 0.0 <= miner["theta"] <= 1.0:
            raise ConfigurationError("miner.theta must be in [0, 1]", {"theta": miner["theta"]})

        encoder = self._config["encoder"]
        if encoder["slim_layers"] * 2 != encoder["full_layers"]:
            raise ConfigurationError(
                "encoder.slim_layers must be half of encoder.full_layers",
                {"slim_layers": encoder["slim_layers"], "full_layers": encoder["full_layers"]}
            )

        if self._config["head"]["pooling"] not in ("last_layer_cls", "avg_last4_cls"):
            raise ConfigurationError(
                f"不明なプーリング戦略です: {self._config['head']['pooling']}",
                {"pooling": self._config["head"]["pooling"]}
            )

        for name, preset in self._config["training"]["presets"].items():
            for key in ("max_epochs", "batch_size", "lr"):
                if preset[key] <= 0:
                    raise ConfigurationError(
                        f"training preset {name}.{key} must be positive",
                        {"preset": name, key: preset[key]}
                    )

    def get(self, key: str, default: Any = None) -> Any:
        """Get configuration value."""
        return self._config.get(key, default)

    def __getitem__(self, key: str) -> Any:
        """Get configuration value using dictionary syntax."""
        return self._config[key]

    def __contains__(self, key: str) -> bool:
        """Check if configuration key exists."""
        return key in self._config

    def as_dict(self) -> dict[str, Any]:
        """マニフェスト用のスナップショットを返す。"""
        return copy.deepcopy(self._config)

    @property
    def seed(self) -> int:
        """Get the global seed."""
        return self._config["seed"]

    @property
    def shards(self) -> int:
        """Get the number of worker processes for sharded stages."""
        return self._config["shards"]

    @property
    def strip_diacritics(self) -> bool:
        """Check if the normalizer strips diacritics."""
        return self._config["normalizer"]["strip_diacritics"]

    @property
    def synth(self) -> dict[str, Any]:
        """Get the synthetic corpus section."""
        return self._config["synth"]

    @property
    def miner(self) -> dict[str, Any]:
        """Get the miner section."""
        return self._config["miner"]

    @property
    def vocab(self) -> dict[str, Any]:
        """Get the vocabulary section."""
        return self._config["vocab"]

    def training_preset(self, name: str) -> dict[str, Any]:
        """名前付きの学習プリセットを取得する。"""
        presets = self._config["training"]["presets"]
        if name not in presets:
            raise ConfigurationError(
                f"不明な学習プリセットです: {name}",
                {"preset": name, "available": sorted(presets)}
            )
        return dict(presets[name])
