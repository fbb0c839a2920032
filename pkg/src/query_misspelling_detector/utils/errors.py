"""Custom exception classes for the query misspelling detector."""


class DetectorError(Exception):
    """Base exception for all query misspelling detector errors."""

    def __init__(self, message: str, details: dict | None = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class ConfigurationError(DetectorError):
    """Raised when configuration is invalid or missing."""
    pass


class ValidationError(DetectorError):
    """Raised when input data violates an operation contract."""
    pass


class InputFileNotFoundError(DetectorError):
    """Raised when an input file cannot be found."""
    pass


class OutputWriteError(DetectorError):
    """Raised when an output file cannot be written."""
    pass


class ParseError(DetectorError):
    """Raised when a data file is malformed (details carry line_number)."""
    pass


class InapplicableChannelError(DetectorError):
    """Raised when no enabled typo operation can edit the given text."""
    pass


class InsufficientClassError(DetectorError):
    """Raised when a misspelling ratio cannot be reached without duplication."""
    pass


class SizingError(DetectorError):
    """Raised when an example pool is too small for the requested split."""
    pass


class ShapeError(DetectorError):
    """Raised when tensor shapes are incompatible."""
    pass


class UndefinedLossError(DetectorError):
    """Raised when every position of a loss is ignored."""
    pass


class NothingToMaskError(DetectorError):
    """Raised when a sequence has no maskable token (skip-example signal)."""
    pass


class CheckpointError(DetectorError):
    """Raised when a checkpoint cannot be loaded or does not match."""
    pass


class TrainingDivergedError(DetectorError):
    """Raised when the training loss becomes non-finite."""
    pass


class HashMismatchError(DetectorError):
    """Raised when an input file hash differs from the one in a manifest."""
    pass
