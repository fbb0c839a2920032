"""TSV/JSON-linesライターのユニットテスト"""

import json

import pytest

from query_misspelling_detector.readers.jsonl_reader import JsonlReader
from query_misspelling_detector.readers.tsv_reader import TsvReader
from query_misspelling_detector.writers.jsonl_writer import JsonlWriter
from query_misspelling_detector.writers.tsv_writer import TsvWriter
from query_misspelling_detector.utils.errors import OutputWriteError, ValidationError
from query_misspelling_detector.utils.models import KeystrokeSession, LabeledExample, MinedPair


class TestTsvWriter:
    """TSVの書き込み"""

    def test_labeled_format(self, tmp_path):
        path = tmp_path / "out" / "train.tsv"
        count = TsvWriter().write_labeled([LabeledExample("sni osle", "sno isle", True)], str(path))
        assert count == 1
        assert path.read_bytes() == "sni osle\tsno isle\tTrue\n".encode("utf-8")

    def test_pairs_are_readable(self, tmp_path):
        pairs = [MinedPair("q", "c", 2, "backtrack"), MinedPair("r", "d", 1, "transfer")]
        path = str(tmp_path / "pairs.tsv")
        TsvWriter().write_pairs(pairs, path)
        assert TsvReader().read_pairs(path) == pairs

    def test_gazetteer_weights_are_exact(self, tmp_path):
        path = str(tmp_path / "g.tsv")
        TsvWriter().write_gazetteer([("a", 1 / 3)], path)
        assert TsvReader().read_gazetteer(path) == [("a", 1 / 3)]

    def test_tab_in_field(self, tmp_path):
        with pytest.raises(ValidationError):
            TsvWriter().write_lines(["a\tb"], str(tmp_path / "l.txt"))

    def test_unwritable_path(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x", encoding="utf-8")
        with pytest.raises(OutputWriteError):
            TsvWriter().write_lines(["a"], str(blocker / "sub" / "l.txt"))


class TestJsonlWriter:
    """JSON-linesの書き込み"""

    def test_sessions_are_readable(self, tmp_path):
        sessions = [
            KeystrokeSession("s-1", [(0, "c"), (1, "ca"), (2, "café")], engagement="café"),
            KeystrokeSession("s-2", [(0, "a")], transfer_correction=("a", "b")),
        ]
        path = str(tmp_path / "sessions.jsonl")
        assert JsonlWriter().write_sessions(sessions, path) == 2
        assert JsonlReader().read_sessions(path) == sessions

    def test_non_ascii_is_kept(self, tmp_path):
        path = tmp_path / "r.jsonl"
        JsonlWriter().write_records([{"text": "café"}], str(path))
        line = path.read_text(encoding="utf-8")
        assert "café" in line
        assert json.loads(line) == {"text": "café"}
