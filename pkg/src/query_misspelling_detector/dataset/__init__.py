"""Labeled-example datasets: ratio enforcement, splits, TSV files."""

from ..readers.tsv_reader import TsvReader
from ..utils.models import LabeledExample
from ..writers.tsv_writer import TsvWriter
from .splitting import SplitSpec, dedup, enforce_ratio, split


def read_tsv(path: str) -> list[LabeledExample]:
    """`query\\tcorrection\\tis_misspelt` 形式のファイルを読み込む。"""
    return TsvReader().read_labeled(path)


def write_tsv(examples: list[LabeledExample], path: str) -> int:
    """`query\\tcorrection\\tis_misspelt` 形式で書き出す。"""
    return TsvWriter().write_labeled(examples, path)


__all__ = ["SplitSpec", "dedup", "enforce_ratio", "read_tsv", "split", "write_tsv"]
