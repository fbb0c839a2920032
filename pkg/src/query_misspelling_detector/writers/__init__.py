"""Writers for the pipeline's file formats."""

from .jsonl_writer import JsonlWriter
from .report_writer import ReportWriter
from .tsv_writer import TsvWriter

__all__ = ["JsonlWriter", "ReportWriter", "TsvWriter"]
