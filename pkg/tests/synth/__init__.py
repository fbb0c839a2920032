"""Tests for the synthetic corpus."""
