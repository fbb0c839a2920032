"""Text normalization and tokenization."""

from .normalizer import QueryNormalizer, normalize, normalize_text
from .tokenizer import Vocabulary, build_subword_vocab, build_word_vocab, decode, encode

__all__ = [
    "QueryNormalizer",
    "Vocabulary",
    "build_subword_vocab",
    "build_word_vocab",
    "decode",
    "encode",
    "normalize",
    "normalize_text",
]
