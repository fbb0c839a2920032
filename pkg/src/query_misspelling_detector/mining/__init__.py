"""Mining labeled misspelling pairs from keystroke sessions."""

from .distance import edit_distance, lcs_len
from .miner import (
    CalibrationStats,
    DistanceBand,
    MiningPipeline,
    MiningResult,
    MiningScore,
    backtrack_mine,
    calibrate,
    emit_labeled,
    resolve_conflicts,
    score_pairs,
    transfer_mine,
)

__all__ = [
    "CalibrationStats",
    "DistanceBand",
    "MiningPipeline",
    "MiningResult",
    "MiningScore",
    "backtrack_mine",
    "calibrate",
    "edit_distance",
    "emit_labeled",
    "lcs_len",
    "resolve_conflicts",
    "score_pairs",
    "transfer_mine",
]
