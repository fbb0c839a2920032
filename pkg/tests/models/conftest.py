"""モデルテスト共通のフィクスチャ"""

import pytest

from query_misspelling_detector.models import EncoderConfig, HeadConfig, LstmConfig
from query_misspelling_detector.text.tokenizer import SPECIAL_TOKENS, Vocabulary


@pytest.fixture
def vocab():
    return Vocabulary.from_tokens(SPECIAL_TOKENS + ("sno", "isle", "liberty", "bowl", "ponderosa"))


@pytest.fixture
def lstm_config(vocab):
    return LstmConfig(vocab_size=len(vocab), embed_dim=6, hidden_dim=5, max_len=8)


@pytest.fixture
def tiny_encoder(vocab):
    """2層の小さなエンコーダ設定"""
    return EncoderConfig(vocab_size=len(vocab), n_layers=2, hidden_dim=8, n_heads=2, ff_dim=16, max_len=8)


@pytest.fixture
def head_config():
    return HeadConfig()
