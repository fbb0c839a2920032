"""Training loops for MLM pre-training, encoder fine-tuning and the LSTM baselines.

Every epoch shuffles with its own generator `default_rng([seed, epoch])` and
dropout draws are keyed by a global step counter, so a run is reproducible
from its TrainConfig alone. After each epoch the dev set is scored and the
parameters of the best epoch are kept.
"""

import time
from dataclasses import dataclass
from typing import Any, Optional, Sequence

import numpy as np

from ..autodiff import ops
from ..autodiff.optim import Adam
from ..autodiff.tensor import Tensor, backward, no_grad
from ..models.checkpoint import ModelCheckpoint, checkpoint_from_model
from ..models.heads import MaskedLanguageModel, mlm_mask
from ..models.params import Module
from ..text.tokenizer import Vocabulary
from ..utils.errors import ConfigurationError, NothingToMaskError, TrainingDivergedError, ValidationError
from ..utils.logging_config import get_logger
from ..utils.models import LabeledExample
from .batching import batch_slices, encode_examples, encode_texts, trim_padding
from .history import EpochRecord, TrainHistory
from .metrics import evaluate


logger = get_logger(__name__)

TASKS = ("mlm_pretrain", "finetune", "lstm")

# 事前学習のdev分割とdevマスクに使う乱数ストリームの識別子
_DEV_SPLIT_STREAM = 7001
_DEV_MASK_STREAM = 7002


@dataclass(frozen=True)
class TrainConfig:
    """1回の学習の設定。"""

    max_epochs: int
    batch_size: int
    lr: float
    seed: int = 42
    task: str = "finetune"
    dev_fraction: float = 0.02  # mlm_pretrainでdevが与えられない場合

    def __post_init__(self) -> None:
        for name in ("max_epochs", "batch_size", "lr"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name}は正である必要があります", {name: getattr(self, name)})
        if self.task not in TASKS:
            raise ConfigurationError(f"不明なタスクです: {self.task}", {"task": self.task, "available": list(TASKS)})
        if not 0.0 < self.dev_fraction < 1.0:
            raise ConfigurationError("dev_fractionは(0, 1)の範囲である必要があります", {"dev_fraction": self.dev_fraction})

    @classmethod
    def from_preset(cls, preset: dict[str, Any], task: str, seed: int, **overrides: Any) -> "TrainConfig":
        values = {**preset, **{k: v for k, v in overrides.items() if v is not None}}
        return cls(
            max_epochs=int(values["max_epochs"]),
            batch_size=int(values["batch_size"]),
            lr=float(values["lr"]),
            seed=seed,
            task=task,
            dev_fraction=float(values.get("dev_fraction", 0.02)),
        )


def _check_finite(loss: Tensor, epoch: int, step: int) -> None:
    value = loss.item()
    if not np.isfinite(value):
        raise TrainingDivergedError(
            f"損失が有限値ではなくなりました (エポック {epoch}, ステップ {step}): {value}",
            {"epoch": epoch, "step": step, "loss": repr(value)}
        )


def split_pretrain_dev(texts: Sequence[str], fraction: float, seed: int) -> tuple[list[str], list[str]]:
    """事前学習コーパスから固定シードでdev用のテキストを取り分ける。"""
    n = len(texts)
    n_dev = max(1, int(np.floor(fraction * n + 0.5))) if n > 1 else 0
    order = np.random.default_rng([seed, _DEV_SPLIT_STREAM]).permutation(n)
    dev_index = set(order[:n_dev].tolist())
    train = [t for i, t in enumerate(texts) if i not in dev_index]
    dev = [t for i, t in enumerate(texts) if i in dev_index]
    return train, dev


def mask_batch(
    ids: np.ndarray,
    vocab_size: int,
    rng: np.random.Generator,
) -> Optional[tuple[np.ndarray, np.ndarray]]:
    """
    各行をマスクする。マスクできない行は除外し、残りがなければNoneを返す。
    """
    corrupted, targets = [], []
    for row in ids:
        try:
            c, t = mlm_mask(row, vocab_size, rng)
        except NothingToMaskError:
            continue
        corrupted.append(c)
        targets.append(t)
    if not corrupted:
        return None
    return np.stack(corrupted), np.stack(targets)


class Trainer:
    """モデル1つ分の学習ループ。"""

    def __init__(self, model: Module, config: TrainConfig, vocab: Vocabulary, max_len: int, label: str):
        """
        Args:
            model: 学習するモデル（分類タスクはlogits、MLMはlossを持つ）
            config: 学習設定
            vocab: モデルの語彙
            max_len: 入力の固定長
            label: 履歴に記録するモデル名
        """
        is_mlm = isinstance(model, MaskedLanguageModel)
        if is_mlm != (config.task == "mlm_pretrain"):
            raise ConfigurationError(
                f"タスクとモデルが一致しません: task={config.task}, arch={model.arch}",
                {"task": config.task, "arch": model.arch}
            )
        self.model = model
        self.config = config
        self.vocab = vocab
        self.max_len = max_len
        self.label = label
        self.step = 0

    # -- epochs -------------------------------------------------------------------

    def _update(self, loss: Tensor, optimizer: Adam, epoch: int) -> float:
        _check_finite(loss, epoch, self.step)
        optimizer.zero_grad()
        backward(loss, optimizer.params.values())
        optimizer.step()
        self.step += 1
        return loss.item()

    def _classification_epoch(self, ids: np.ndarray, labels: np.ndarray, optimizer: Adam, epoch: int) -> float:
        order = np.random.default_rng([self.config.seed, epoch]).permutation(len(ids))
        losses = []
        for part in batch_slices(len(order), self.config.batch_size):
            index = order[part]
            logits = self.model.logits(
                trim_padding(ids[index]), train=True, step=self.step, seed=self.config.seed
            )
            loss = ops.cross_entropy(logits, labels[index])
            losses.append(self._update(loss, optimizer, epoch))
            logger.debug(f"エポック {epoch} ステップ {self.step}: loss={losses[-1]:.6f}")
        return float(np.mean(losses))

    def _mlm_epoch(self, ids: np.ndarray, optimizer: Adam, epoch: int) -> float:
        rng = np.random.default_rng([self.config.seed, epoch])
        order = rng.permutation(len(ids))
        losses = []
        for part in batch_slices(len(order), self.config.batch_size):
            masked = mask_batch(ids[order[part]], len(self.vocab), rng)
            if masked is None:
                continue
            corrupted, targets = masked
            width = trim_padding(corrupted).shape[1]
            loss = self.model.loss(
                corrupted[:, :width], targets[:, :width], train=True, step=self.step, seed=self.config.seed
            )
            losses.append(self._update(loss, optimizer, epoch))
            logger.debug(f"エポック {epoch} ステップ {self.step}: mlm_loss={losses[-1]:.6f}")
        if not losses:
            raise ValidationError("マスクできる学習データがありません")
        return float(np.mean(losses))

    def mlm_dev_loss(self, dev_batches: list[tuple[np.ndarray, np.ndarray]]) -> float:
        """固定マスクのdevデータでの選択位置あたりの平均損失。"""
        self.model.eval()
        total, count = 0.0, 0
        with no_grad():
            for corrupted, targets in dev_batches:
                n = int(np.sum(targets != ops.IGNORE_ID))
                total += self.model.loss(corrupted, targets).item() * n
                count += n
        return total / count

    def _fixed_dev_batches(self, ids: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
        rng = np.random.default_rng([self.config.seed, _DEV_MASK_STREAM])
        batches = []
        for part in batch_slices(len(ids), self.config.batch_size):
            masked = mask_batch(ids[part], len(self.vocab), rng)
            if masked is not None:
                corrupted, targets = masked
                width = trim_padding(corrupted).shape[1]
                batches.append((corrupted[:, :width], targets[:, :width]))
        if not batches:
            raise ValidationError("マスクできるdevデータがありません")
        return batches

    # -- driver -------------------------------------------------------------------

    def fit(self, train_set: Sequence[Any], dev_set: Sequence[Any]) -> tuple[ModelCheckpoint, TrainHistory]:
        """
        学習し、devで最良だったエポックのチェックポイントと履歴を返す。

        Args:
            train_set: 分類タスクはLabeledExampleの列、MLMはテキスト（またはLabeledExample）の列
            dev_set: 同上（MLMで空の場合は学習データから取り分ける）

        Raises:
            TrainingDivergedError: 損失が有限値でなくなった場合
            ValidationError: 学習データまたはdevデータが空の場合
        """
        config = self.config
        if not train_set:
            raise ValidationError("学習データが空です")
        is_mlm = config.task == "mlm_pretrain"
        if is_mlm:
            texts = [x.query if isinstance(x, LabeledExample) else x for x in train_set]
            dev_texts = [x.query if isinstance(x, LabeledExample) else x for x in dev_set]
            if not dev_texts:
                texts, dev_texts = split_pretrain_dev(texts, config.dev_fraction, config.seed)
            train_ids = encode_texts(texts, self.vocab, self.max_len)
            dev_batches = self._fixed_dev_batches(encode_texts(dev_texts, self.vocab, self.max_len))
        else:
            if not dev_set:
                raise ValidationError("devデータが空です")
            train_ids, train_labels = encode_examples(train_set, self.vocab, self.max_len)

        params = self.model.trainable_parameters()
        frozen = [p for name, p in self.model.parameters().items() if name not in params]
        for param in frozen:
            param.requires_grad = False
        optimizer = Adam(params, lr=config.lr)

        history = TrainHistory(model=self.label, task=config.task)
        best_state: Optional[dict[str, np.ndarray]] = None
        logger.info(
            f"学習を開始: {self.label} (task: {config.task}, 学習データ: {len(train_ids)}, "
            f"パラメータ: {sum(p.size for p in params.values())}, 凍結: {sum(p.size for p in frozen)})"
        )
        start_time = time.time()
        try:
            for epoch in range(1, config.max_epochs + 1):
                epoch_start = time.time()
                self.model.train()
                if is_mlm:
                    train_loss = self._mlm_epoch(train_ids, optimizer, epoch)
                    record = EpochRecord(epoch, train_loss, dev_loss=self.mlm_dev_loss(dev_batches))
                    summary = f"dev_loss={record.dev_loss:.4f}"
                else:
                    train_loss = self._classification_epoch(train_ids, train_labels, optimizer, epoch)
                    report = evaluate(self.model, dev_set, self.vocab, self.max_len)
                    record = EpochRecord(epoch, train_loss, dev=report)
                    macro = report.macro_f1
                    summary = f"dev_macro_f1={macro:.4f}" if macro is not None else "dev_macro_f1=n/a"

                history.records.append(record)
                if history.best_epoch == epoch:
                    best_state = self.model.state_dict()
                logger.info(
                    f"エポック {epoch}/{config.max_epochs}: train_loss={train_loss:.4f}, {summary} "
                    f"(処理時間: {time.time() - epoch_start:.2f}秒)"
                )
        finally:
            for param in frozen:
                param.requires_grad = True
            self.model.eval()

        self.model.load_state_dict(best_state)
        elapsed_time = time.time() - start_time
        logger.info(
            f"学習が完了: {self.label} (ベストエポック: {history.best_epoch}, 処理時間: {elapsed_time:.2f}秒)"
        )
        return checkpoint_from_model(self.model, self.vocab), history


def train(
    model: Module,
    config: TrainConfig,
    train_set: Sequence[Any],
    dev_set: Sequence[Any],
    vocab: Vocabulary,
    max_len: int,
    label: Optional[str] = None,
) -> tuple[ModelCheckpoint, TrainHistory]:
    """モデルを学習し、(ベストエポックのチェックポイント, 履歴) を返す。"""
    return Trainer(model, config, vocab, max_len, label or model.arch).fit(train_set, dev_set)
