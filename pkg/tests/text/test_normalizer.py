"""クエリ正規化のユニットテスト"""

import unicodedata

import pytest

from query_misspelling_detector.text.normalizer import QueryNormalizer, normalize, normalize_text
from query_misspelling_detector.utils.models import NormalizedQuery


class TestNormalizeExamples:
    """代表的な入力の正規化結果"""

    @pytest.mark.parametrize(
        "raw, expected",
        [
            ("liberty   bowl", "liberty bowl"),
            ("293 concord", "293 concord"),
            ("Sno-Isle!! 🌲", "sno isle"),
            ("  Ponderosa\tAuto\n", "ponderosa auto"),
            ("", ""),
            ("!!!", ""),
            ("café", "café"),
        ],
    )
    def test_examples(self, raw, expected):
        assert normalize_text(raw) == expected

    def test_returns_normalized_query(self):
        result = normalize("Liberty Bowl")
        assert isinstance(result, NormalizedQuery)
        assert result.text == "liberty bowl"
        assert str(result) == "liberty bowl"

    def test_output_is_nfc(self):
        text = normalize_text("Café du Monde")
        assert unicodedata.is_normalized("NFC", text)

    def test_control_characters_are_deleted(self):
        assert normalize_text("abc\u0000def​") == "abcdef"

    def test_replacement_character_is_deleted(self):
        assert normalize_text("sea�ttle") == "seattle"


class TestStripDiacritics:
    """ダイアクリティカルマーク除去オプション"""

    def test_disabled_by_default(self):
        assert normalize_text("Café") == "café"

    def test_enabled(self):
        assert normalize_text("Café Crème", strip_diacritics=True) == "cafe creme"


class TestCombiningMarks:
    """結合文字の扱い"""

    def test_dotted_capital_i_keeps_its_dot(self):
        # "İ".lower() は "i" + U+0307 で、合成済みの文字がないため2文字のまま残る
        assert normalize_text("İstanbul") == "i\u0307stanbul"

    def test_dotted_capital_i_with_strip(self):
        assert normalize_text("İstanbul", strip_diacritics=True) == "istanbul"

    def test_mark_after_punctuation_is_dropped(self):
        assert normalize_text("sno-\u0301isle") == "sno isle"

    def test_leading_mark_is_dropped(self):
        assert normalize_text("\u0301\u0308bowl") == "bowl"

    def test_mark_after_deleted_symbol_attaches_to_letter(self):
        assert normalize_text("cafe\U0001F332\u0301") == "café"


class TestQueryNormalizer:
    """QueryNormalizerクラス"""

    def test_call(self):
        assert QueryNormalizer()("Sno-Isle") == "sno isle"

    def test_normalize_lines_strips_newlines(self):
        normalizer = QueryNormalizer()
        lines = ["Liberty Bowl\n", "293  Concord\n", "\n"]
        assert list(normalizer.normalize_lines(lines)) == ["liberty bowl", "293 concord", ""]

    def test_strip_option_is_kept(self):
        assert QueryNormalizer(strip_diacritics=True).normalize("Crème").text == "creme"
