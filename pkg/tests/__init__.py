"""Tests for the query misspelling detector."""
