"""マイニングパイプラインのユニットテスト"""

import pytest

from query_misspelling_detector.mining.miner import (
    CalibrationStats,
    DistanceBand,
    MiningPipeline,
    backtrack_mine,
    calibrate,
    emit_labeled,
    resolve_conflicts,
    score_pairs,
    transfer_mine,
)
from query_misspelling_detector.synth.gazetteer import generate_gazetteer
from query_misspelling_detector.synth.sessions import (
    SessionBehavior,
    build_clean_session,
    build_select_session,
    generate_sessions,
)
from query_misspelling_detector.synth.typo_channel import TypoChannel
from query_misspelling_detector.utils.errors import ConfigurationError
from query_misspelling_detector.utils.models import GroundTruthPair, KeystrokeSession, LabeledExample, MinedPair


BAND = DistanceBand()


class TestBacktrackMine:
    """キーストロークの遡り"""

    def test_clean_session_yields_nothing(self):
        assert backtrack_mine(build_clean_session("s", "liberty bowl"), BAND) == []

    def test_select_session(self):
        session = build_select_session("s", "sno isle", "sni osle")
        assert backtrack_mine(session, BAND) == [MinedPair("sni osle", "sno isle", 1, "backtrack")]

    def test_no_engagement(self):
        session = KeystrokeSession("s", [(0, "sni osle")])
        assert backtrack_mine(session, BAND) == []

    def test_too_far_candidate_is_rejected(self):
        session = KeystrokeSession("s", [(0, "xyzzy quux"), (1, "sno isle")], engagement="sno isle")
        assert backtrack_mine(session, BAND) == []

    def test_length_gate_rejects_short_snapshots(self):
        session = KeystrokeSession("s", [(0, "snx"), (1, "sno isle")], engagement="sno isle")
        assert backtrack_mine(session, BAND) == []

    def test_snapshots_are_normalized(self):
        session = KeystrokeSession("s", [(0, "Sni-Osle!")], engagement="Sno Isle")
        assert backtrack_mine(session, BAND) == [MinedPair("sni osle", "sno isle", 1, "backtrack")]

    def test_invalid_band(self):
        with pytest.raises(ConfigurationError):
            DistanceBand(min_dist=0)


class TestTransferMine:
    """既存システムの書き換え"""

    def test_transfer_event(self):
        session = KeystrokeSession(
            "s", [(0, "pondarosa auto")], transfer_correction=("pondarosa auto", "ponderosa auto")
        )
        assert transfer_mine(session) == [MinedPair("pondarosa auto", "ponderosa auto", 1, "transfer")]

    def test_no_transfer_event(self):
        assert transfer_mine(KeystrokeSession("s", [(0, "a")])) == []

    def test_equal_after_normalization(self):
        session = KeystrokeSession("s", [(0, "A")], transfer_correction=("Liberty Bowl", "liberty  bowl"))
        assert transfer_mine(session) == []


class TestResolveAndCalibrate:
    """多数決と校正"""

    def test_strict_majority(self):
        pairs = [MinedPair("q", "a")] * 3 + [MinedPair("q", "b")]
        assert resolve_conflicts(pairs) == {"q": ("a", 3)}

    def test_tie_breaks_lexicographically(self):
        pairs = [MinedPair("q", "b", 2), MinedPair("q", "a", 2)]
        assert resolve_conflicts(pairs) == {"q": ("a", 2)}

    def test_single_pair(self):
        assert resolve_conflicts([MinedPair("q", "c")]) == {"q": ("c", 1)}

    def _stats(self, final: int, corrected: int) -> CalibrationStats:
        stats = CalibrationStats()
        stats.final_query_count["c"] = final
        stats.corrected_away_count["c"] = corrected
        return stats

    def test_kept_when_correction_survives(self):
        assert calibrate({"q": ("c", 1)}, self._stats(10, 1), 0.5) == {"q": ("c", 1)}

    def test_dropped_when_correction_is_corrected_away(self):
        assert calibrate({"q": ("c", 1)}, self._stats(1, 9), 0.5) == {}

    def test_theta_zero_is_identity(self):
        resolved = {"q": ("c", 1), "r": ("d", 2)}
        assert calibrate(resolved, self._stats(0, 5), 0.0) == resolved

    def test_unseen_correction_is_kept(self):
        assert calibrate({"q": ("z", 1)}, CalibrationStats(), 0.9) == {"q": ("z", 1)}

    def test_invalid_theta(self):
        with pytest.raises(ConfigurationError):
            calibrate({}, CalibrationStats(), 1.5)


class TestEmitLabeled:
    """ラベル付きデータ"""

    def test_rows(self):
        rows = emit_labeled({"sni osle": ("sno isle", 1)}, [build_clean_session("s", "liberty bowl")])
        assert rows == [
            LabeledExample("liberty bowl", "liberty bowl", False),
            LabeledExample("sni osle", "sno isle", True),
        ]

    def test_true_row_wins(self):
        session = build_clean_session("s", "sni osle")
        rows = emit_labeled({"sni osle": ("sno isle", 1)}, [session])
        assert rows == [LabeledExample("sni osle", "sno isle", True)]


class TestScorePairs:
    """正解ペアとの照合"""

    def test_precision_and_recall(self):
        mined = [MinedPair("a", "b"), MinedPair("c", "d")]
        truth = [GroundTruthPair("a", "b", "s1"), GroundTruthPair("e", "f", "s2"), GroundTruthPair("g", "h", "s3")]
        score = score_pairs(mined, truth)
        assert score.precision == 0.5
        assert score.recall == pytest.approx(1 / 3)
        assert score.n_matched == 1

    def test_empty_inputs(self):
        score = score_pairs([], [])
        assert score.precision == 0.0 and score.recall == 0.0


class TestMiningPipeline:
    """パイプライン全体"""

    @pytest.fixture(scope="class")
    def batch(self):
        channel = TypoChannel(
            {"substitution": 0.35, "transposition": 0.2, "deletion": 0.2, "insertion": 0.15, "space": 0.1}
        )
        return generate_sessions(generate_gazetteer(11, 100), channel, SessionBehavior(), 2000, 11, 500)

    def test_precision_and_recall_on_synthetic_log(self, batch):
        result = MiningPipeline().run(batch.sessions)
        score = score_pairs(result.pairs(), batch.ground_truth)
        assert score.precision >= 0.85
        assert score.recall >= 0.6

    def test_result_does_not_depend_on_shards(self, batch):
        single = MiningPipeline(shards=1).run(batch.sessions)
        sharded = MiningPipeline(shards=3).run(batch.sessions)
        assert single.labeled == sharded.labeled
        assert single.pairs() == sharded.pairs()

    def test_each_query_maps_to_one_correction(self, batch):
        result = MiningPipeline().run(batch.sessions)
        queries = [p.q for p in result.pairs()]
        assert len(queries) == len(set(queries))
        assert all(p.q != p.c for p in result.pairs())
