"""Tests for text normalization and tokenization."""
