"""埋め込みファイルリーダーのユニットテスト"""

import numpy as np
import pytest

from query_misspelling_detector.readers.embedding_reader import EmbeddingReader
from query_misspelling_detector.utils.errors import ParseError


def write(tmp_path, text: str) -> str:
    path = tmp_path / "vectors.txt"
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestEmbeddingReader:
    """`word v1 ... vd` 形式"""

    def test_vectors_and_dim(self, tmp_path):
        vectors, dim = EmbeddingReader().read_file(write(tmp_path, "sno 0.1 0.2 0.3\nisle 1 2 3\n"))
        assert dim == 3
        np.testing.assert_allclose(vectors["isle"], [1.0, 2.0, 3.0])

    def test_keep_filters_words(self, tmp_path):
        vectors, _ = EmbeddingReader().read_file(write(tmp_path, "a 1 2\nb 3 4\n"), keep={"b"})
        assert list(vectors) == ["b"]

    def test_inconsistent_dimension(self, tmp_path):
        with pytest.raises(ParseError) as exc_info:
            EmbeddingReader().read_file(write(tmp_path, "a 1 2\nb 3\n"))
        assert exc_info.value.details["expected_dim"] == 2
        assert exc_info.value.details["line_number"] == 2

    def test_non_numeric(self, tmp_path):
        with pytest.raises(ParseError):
            EmbeddingReader().read_file(write(tmp_path, "a 1 x\n"))

    def test_empty_file(self, tmp_path):
        with pytest.raises(ParseError):
            EmbeddingReader().read_file(write(tmp_path, ""))
