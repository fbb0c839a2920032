"""Training loops, evaluation metrics, histories and prediction."""

from .batching import class_probabilities, encode_examples, encode_texts, trim_padding
from .history import ComparisonRow, EpochRecord, TrainHistory, compare_histories, select_best_epoch
from .metrics import ClassMetrics, MetricsReport, evaluate, evaluate_predictions, f1
from .predictor import Predictor, predict
from .trainer import TASKS, TrainConfig, Trainer, split_pretrain_dev, train

__all__ = [
    "TASKS",
    "ClassMetrics",
    "ComparisonRow",
    "EpochRecord",
    "MetricsReport",
    "Predictor",
    "TrainConfig",
    "TrainHistory",
    "Trainer",
    "class_probabilities",
    "compare_histories",
    "encode_examples",
    "encode_texts",
    "evaluate",
    "evaluate_predictions",
    "f1",
    "predict",
    "select_best_epoch",
    "split_pretrain_dev",
    "train",
    "trim_padding",
]
