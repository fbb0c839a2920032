"""Tests for file and report writers."""
