"""Query Misspelling Detector - mine misspelling pairs from query logs and train detectors."""

__version__ = "0.1.0"
