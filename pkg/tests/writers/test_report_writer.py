"""レポートライターのユニットテスト"""

import pytest
from openpyxl import load_workbook

from query_misspelling_detector.training.history import ComparisonRow
from query_misspelling_detector.training.metrics import MetricsReport
from query_misspelling_detector.utils.errors import ValidationError
from query_misspelling_detector.writers.report_writer import (
    COMPARISON_HEADER,
    ReportWriter,
    format_comparison,
)


@pytest.fixture
def report_writer():
    """ReportWriterインスタンスを返すフィクスチャ"""
    return ReportWriter()


@pytest.fixture
def rows():
    """比較表の行を返すフィクスチャ（マクロF1の昇順）"""
    return [
        ComparisonRow("lstm", "lstm", 3, None, 0.5, 0.4),
        ComparisonRow("encoder-slim-pretrained", "finetune", 2, 0.8125, 0.75, 0.3),
    ]


class TestFormatComparison:
    """テキスト表"""

    def test_columns_and_undefined_values(self, rows):
        lines = format_comparison(rows).splitlines()
        assert lines[0].split() == ["Model", "Macro", "F1", "F1", "(1)", "Epoch"]
        assert lines[1].split() == ["lstm", "n/a", "0.5000", "3"]
        assert lines[2].split() == ["encoder-slim-pretrained", "0.8125", "0.7500", "2"]


class TestReportWriter:
    """Excel出力"""

    def test_write_comparison(self, report_writer, rows, tmp_path):
        output = tmp_path / "out" / "comparison.xlsx"
        assert report_writer.write_comparison(rows, str(output)) == str(output)

        ws = load_workbook(output)["Best Models"]
        assert [c.value for c in ws[1]] == COMPARISON_HEADER
        assert [c.value for c in ws[3]] == ["encoder-slim-pretrained", "finetune", 2, 0.8125, 0.75, 0.3]
        assert ws[2][3].value is None
        assert ws[1][0].font.bold

    def test_write_comparison_without_rows(self, report_writer, tmp_path):
        with pytest.raises(ValidationError):
            report_writer.write_comparison([], str(tmp_path / "c.xlsx"))

    def test_write_metrics(self, report_writer, tmp_path):
        output = tmp_path / "metrics.xlsx"
        report_writer.write_metrics(MetricsReport(tp=3, fp=1, fn=1, tn=5), str(output))

        wb = load_workbook(output)
        assert wb.sheetnames == ["Metrics", "Confusion"]
        metrics = wb["Metrics"]
        assert [c.value for c in metrics[1]] == ["Label", "Precision", "Recall", "F1"]
        assert metrics[2][0].value == "1"
        assert metrics[2][1].value == pytest.approx(0.75)
        assert metrics.max_row == 4
        confusion = wb["Confusion"]
        assert [c.value for c in confusion[2]] == ["Actual 1", 3, 1]
        assert [c.value for c in confusion[3]] == ["Actual 0", 1, 5]
