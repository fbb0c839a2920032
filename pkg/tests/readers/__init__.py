"""Tests for file readers."""
