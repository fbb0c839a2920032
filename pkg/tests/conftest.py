"""テスト共通のフィクスチャ"""

import json

import pytest

from query_misspelling_detector.utils.config import Config


# 数秒で全工程が終わる小さな設定
TINY_CONFIG = {
    "seed": 7,
    "synth": {"n_entities": 300, "n_sessions": 1500, "shard_size": 500, "general_lines": 200},
    "dataset": {
        "finetune": {"train_n": 120, "dev_n": 20, "test_n": 20, "misspell_ratio": 0.3},
        "pretrain": {"train_n": 100, "dev_n": 0, "test_n": 0, "misspell_ratio": 0.3},
    },
    "vocab": {"word_max_size": 500, "subword_size": 120, "max_len": 16},
    "lstm": {"embed_dim": 8, "hidden_dim": 8},
    "encoder": {"hidden_dim": 8, "n_heads": 2, "ff_dim": 16, "full_layers": 4, "slim_layers": 2},
    "training": {
        "presets": {
            "pretrain": {"max_epochs": 1, "batch_size": 32, "lr": 1e-3},
            "finetune": {"max_epochs": 1, "batch_size": 32, "lr": 1e-3},
            "lstm": {"max_epochs": 2, "batch_size": 32, "lr": 1e-2},
        }
    },
}


@pytest.fixture(scope="session")
def tiny_config_file(tmp_path_factory):
    """小さな設定のJSONファイル"""
    path = tmp_path_factory.mktemp("config") / "tiny.json"
    path.write_text(json.dumps(TINY_CONFIG), encoding="utf-8")
    return str(path)


@pytest.fixture
def tiny_config(tiny_config_file):
    return Config(tiny_config_file)
