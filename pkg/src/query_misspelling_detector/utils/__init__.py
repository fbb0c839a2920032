"""Utility modules for the query misspelling detector."""
