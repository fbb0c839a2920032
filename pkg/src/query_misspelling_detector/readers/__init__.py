"""Readers for the pipeline's file formats."""

from .embedding_reader import EmbeddingReader
from .jsonl_reader import JsonlReader
from .tsv_reader import TsvReader

__all__ = ["EmbeddingReader", "JsonlReader", "TsvReader"]
