"""JSON-linesリーダーのユニットテスト"""

import json

import pytest

from query_misspelling_detector.readers.jsonl_reader import JsonlReader
from query_misspelling_detector.utils.errors import InputFileNotFoundError, ParseError
from query_misspelling_detector.utils.models import KeystrokeSession


def write_records(tmp_path, records) -> str:
    path = tmp_path / "sessions.jsonl"
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return str(path)


class TestReadSessions:
    """セッションログの読み込み"""

    def test_sessions(self, tmp_path):
        session = KeystrokeSession("s-1", [(0, "s"), (1, "sn")], engagement="sno isle")
        path = write_records(tmp_path, [session.to_dict()])
        assert JsonlReader().read_sessions(path) == [session]

    def test_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "sessions.jsonl"
        record = KeystrokeSession("s-1", [(0, "a")]).to_dict()
        path.write_text("\n" + json.dumps(record) + "\n\n", encoding="utf-8")
        assert len(JsonlReader().read_sessions(str(path))) == 1

    def test_ticks_must_increase(self, tmp_path):
        path = write_records(tmp_path, [{"session_id": "s", "snapshots": [[1, "a"], [1, "ab"]]}])
        with pytest.raises(ParseError) as exc_info:
            JsonlReader().read_sessions(path)
        assert exc_info.value.details["line_number"] == 1

    def test_missing_field(self, tmp_path):
        path = write_records(tmp_path, [{"session_id": "s"}])
        with pytest.raises(ParseError):
            JsonlReader().read_sessions(path)

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        path.write_text('{"session_id": "s"\n', encoding="utf-8")
        with pytest.raises(ParseError):
            JsonlReader().read_records(str(path))

    def test_not_an_object(self, tmp_path):
        path = write_records(tmp_path, [[1, 2]])
        with pytest.raises(ParseError):
            JsonlReader().read_records(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputFileNotFoundError):
            JsonlReader().read_sessions(str(tmp_path / "missing.jsonl"))
