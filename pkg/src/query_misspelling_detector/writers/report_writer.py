"""Model comparison and metrics reports as text tables and Excel (.xlsx) workbooks."""

import os
import time
from typing import Any, Optional, Sequence

from openpyxl import Workbook
from openpyxl.styles import Alignment, Font, PatternFill
from openpyxl.utils import get_column_letter

from ..training.history import ComparisonRow
from ..training.metrics import MetricsReport
from ..utils.errors import OutputWriteError, ValidationError
from ..utils.logging_config import get_logger


# ロガーの取得
logger = get_logger(__name__)

COMPARISON_HEADER = ["Model", "Task", "Best Epoch", "Macro F1", "F1 (misspelt)", "Dev Loss"]
METRICS_HEADER = ["Label", "Precision", "Recall", "F1"]


def _fmt(value: Optional[float]) -> str:
    return f"{value:.4f}" if value is not None else "n/a"


def format_comparison(rows: Sequence[ComparisonRow]) -> str:
    """"Best Models in a Row" 形式のテキスト表（マクロF1の昇順）。"""
    width = max([len("Model")] + [len(r.model) for r in rows]) + 2
    lines = [f"{'Model':<{width}}{'Macro F1':>10}{'F1 (1)':>10}{'Epoch':>7}"]
    for row in rows:
        lines.append(f"{row.model:<{width}}{_fmt(row.macro_f1):>10}{_fmt(row.f1_misspelt):>10}{row.best_epoch:>7}")
    return "\n".join(lines)


class ReportWriter:
    """比較表とメトリクスをExcelファイルに書き出すクラス。"""

    def write_comparison(self, rows: Sequence[ComparisonRow], output_path: str) -> str:
        """
        比較表を1シートのワークブックとして書き出す。

        Raises:
            ValidationError: 行がない場合
            OutputWriteError: 保存に失敗した場合
        """
        if not rows:
            raise ValidationError("比較表の行がありません", {"row_count": 0})
        data: list[list[Any]] = [COMPARISON_HEADER]
        for row in rows:
            data.append([row.model, row.task, row.best_epoch, row.macro_f1, row.f1_misspelt, row.dev_loss])
        return self._save({"Best Models": data}, output_path)

    def write_metrics(self, report: MetricsReport, output_path: str) -> str:
        """メトリクス表と混同行列を2シートで書き出す。"""
        metrics: list[list[Any]] = [METRICS_HEADER]
        for row in report.rows():
            metrics.append([row.label, row.precision, row.recall, row.f1])
        confusion: list[list[Any]] = [
            ["", "Predicted 1", "Predicted 0"],
            ["Actual 1", report.tp, report.fn],
            ["Actual 0", report.fp, report.tn],
            ["Accuracy", report.accuracy, None],
        ]
        return self._save({"Metrics": metrics, "Confusion": confusion}, output_path)

    def _save(self, sheets: dict[str, list[list[Any]]], output_path: str) -> str:
        logger.info(f"Excelファイルの生成を開始: {output_path}")
        start_time = time.time()

        wb = Workbook()
        # デフォルトのシートを削除
        if "Sheet" in wb.sheetnames:
            wb.remove(wb["Sheet"])
        for name, data in sheets.items():
            ws = wb.create_sheet(title=name)
            for row_idx, row_data in enumerate(data, start=1):
                for col_idx, value in enumerate(row_data, start=1):
                    ws.cell(row=row_idx, column=col_idx, value=value)
            self._format_header_row(ws)
            self._auto_adjust_column_width(ws)

        output_dir = os.path.dirname(output_path)
        try:
            if output_dir:
                os.makedirs(output_dir, exist_ok=True)
            wb.save(output_path)
        except OSError as e:
            logger.error(f"ファイルの保存に失敗: {output_path}", exc_info=True)
            raise OutputWriteError(
                f"ファイルの保存に失敗しました: {output_path}",
                {"path": output_path, "error": str(e)}
            ) from e

        elapsed_time = time.time() - start_time
        logger.info(
            f"Excelファイルの生成が完了: {output_path} "
            f"(シート数: {len(sheets)}, 処理時間: {elapsed_time:.2f}秒)"
        )
        return output_path

    def _format_header_row(self, ws) -> None:
        for cell in ws[1]:
            cell.font = Font(bold=True, color="FFFFFF")
            cell.fill = PatternFill(start_color="4472C4", end_color="4472C4", fill_type="solid")
            cell.alignment = Alignment(horizontal="center", vertical="center")

    def _auto_adjust_column_width(self, ws) -> None:
        for column in ws.columns:
            max_length = max((len(str(cell.value)) for cell in column if cell.value is not None), default=0)
            # 最小幅10、最大幅50に制限
            ws.column_dimensions[get_column_letter(column[0].column)].width = min(max(max_length + 2, 10), 50)
