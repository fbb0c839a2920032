"""評価指標と学習履歴のユニットテスト"""

import math

import pytest

from query_misspelling_detector.training import (
    EpochRecord,
    MetricsReport,
    TrainHistory,
    compare_histories,
    evaluate_predictions,
    f1,
    select_best_epoch,
)
from query_misspelling_detector.utils.errors import ParseError, ValidationError


class TestF1:
    """F1の計算"""

    @pytest.mark.parametrize(
        "precision, recall, expected",
        [(0.85, 0.8167, 0.8330), (0.9549, 0.9642, 0.9595), (0.0, 0.0, 0.0), (1.0, 1.0, 1.0)],
    )
    def test_values(self, precision, recall, expected):
        assert f1(precision, recall) == pytest.approx(expected, abs=1e-4)

    def test_macro_of_class_scores(self):
        macro = (f1(0.8500, 0.8167) + f1(0.9549, 0.9642)) / 2
        assert macro == pytest.approx(0.8962, abs=1e-4)


class TestMetricsReport:
    """混同行列からの指標"""

    def test_macro_average(self):
        report = MetricsReport(tp=85, fp=15, fn=19, tn=81)
        pos, neg = report.positive, report.negative
        assert pos.precision == pytest.approx(0.85)
        assert pos.recall == pytest.approx(85 / 104)
        assert neg.precision == pytest.approx(81 / 100)
        assert report.macro_f1 == pytest.approx((pos.f1 + neg.f1) / 2)

    def test_all_predicted_clean(self):
        report = evaluate_predictions([1, 1, 0, 0], [0.1, 0.2, 0.3, 0.4])
        assert report.positive.recall == 0.0
        assert report.positive.f1 == 0.0
        assert report.positive.precision == 0.0

    def test_threshold_is_inclusive(self):
        report = evaluate_predictions([1, 0], [0.5, 0.49])
        assert (report.tp, report.fp, report.fn, report.tn) == (1, 0, 0, 1)
        assert report.macro_f1 == 1.0

    def test_single_class_gold(self):
        report = evaluate_predictions([0, 0, 0], [0.1, 0.9, 0.2])
        assert report.positive.recall is None
        assert report.undefined_classes == ["1"]
        assert report.macro is None
        assert "n/a" in report.format_table()

    def test_empty(self):
        with pytest.raises(ValidationError):
            evaluate_predictions([], [])

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            evaluate_predictions([1, 0], [0.3])

    def test_table_layout(self):
        lines = MetricsReport(tp=3, fp=1, fn=1, tn=5).format_table().splitlines()
        assert lines[0].split() == ["Label", "Precision", "Recall", "F1"]
        assert [line.split()[0] for line in lines[1:]] == ["1", "0", "Macro"]

    def test_dict_round_trip(self):
        report = MetricsReport(tp=3, fp=1, fn=1, tn=5)
        assert MetricsReport.from_dict(report.to_dict()) == report


class TestHistory:
    """ベストエポックと比較表"""

    def test_best_epoch(self):
        assert select_best_epoch([0.5, 0.7, 0.6]) == 2

    def test_ties_pick_earliest(self):
        assert select_best_epoch([0.7, 0.7, 0.1]) == 1

    def test_no_epochs(self):
        assert select_best_epoch([]) == 0

    def test_undefined_macro_never_wins(self):
        history = TrainHistory("m", "finetune", [
            EpochRecord(1, 0.9, dev=MetricsReport(tp=0, fp=1, fn=0, tn=3)),
            EpochRecord(2, 0.8, dev=MetricsReport(tp=1, fp=1, fn=1, tn=1)),
        ])
        assert history.best_epoch == 2

    def test_mlm_uses_dev_loss(self):
        history = TrainHistory("mlm", "mlm_pretrain", [
            EpochRecord(1, 5.0, dev_loss=4.0),
            EpochRecord(2, 4.0, dev_loss=3.5),
            EpochRecord(3, 3.0, dev_loss=3.9),
        ])
        assert history.best_epoch == 2
        assert history.records[2].score == pytest.approx(-3.9)

    def test_save_and_load(self, tmp_path):
        history = TrainHistory("lstm", "lstm", [
            EpochRecord(1, 0.6, dev=MetricsReport(tp=1, fp=1, fn=1, tn=1)),
            EpochRecord(2, 0.4, dev=MetricsReport(tp=2, fp=0, fn=0, tn=2)),
        ])
        path = str(tmp_path / "lstm.history.jsonl")
        assert history.save(path) == 2
        loaded = TrainHistory.load(path)
        assert loaded == history
        assert loaded.to_records()[0]["best_epoch"] == 2

    def test_load_empty(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("", encoding="utf-8")
        with pytest.raises(ParseError):
            TrainHistory.load(str(path))

    def test_comparison_is_sorted_ascending(self):
        good = TrainHistory("good", "finetune", [EpochRecord(1, 0.1, dev=MetricsReport(9, 1, 1, 9))])
        weak = TrainHistory("weak", "finetune", [EpochRecord(1, 0.5, dev=MetricsReport(5, 5, 5, 5))])
        mlm = TrainHistory("mlm", "mlm_pretrain", [EpochRecord(1, 3.0, dev_loss=2.5)])
        rows = compare_histories([good, mlm, weak])
        assert [r.model for r in rows] == ["mlm", "weak", "good"]
        assert rows[0].macro_f1 is None and rows[0].dev_loss == 2.5
        assert math.isclose(rows[2].macro_f1, 0.9)
