"""Minibatch SGD training with momentum and early stopping."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from ..errors import EmptySplit, IoFailure, NonFiniteLoss
from ..metrics import (LABEL_BOT, LABEL_HUMAN, ConfusionMatrix, MetricsReport,
                       compute_metrics, confusion)
from . import ops
from .model import BOT_CLASS, ModelState, backward, forward, normalize_pixels

MONITOR_VAL_LOSS = "val_loss"
MONITOR_VAL_ACCURACY = "val_accuracy"


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 50
    batch_size: int = 32
    learning_rate: float = 0.01
    momentum: float = 0.9
    monitor: str = MONITOR_VAL_LOSS
    patience: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be at least 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must be in [0, 1)")
        if self.monitor not in (MONITOR_VAL_LOSS, MONITOR_VAL_ACCURACY):
            raise ValueError(f"unknown monitor '{self.monitor}'")
        if self.patience < 1:
            raise ValueError("patience must be at least 1")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int  # 1-based
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


@dataclass
class TrainHistory:
    records: list[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    stop_reason: str = ""

    @property
    def stopped_epoch(self) -> int:
        return self.records[-1].epoch if self.records else 0

    def column(self, name: str) -> list[float]:
        return [getattr(r, name) for r in self.records]

    def write_csv(self, destination) -> None:
        path = Path(destination)
        try:
            with path.open("w", newline="") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["epoch", "train_loss", "val_loss",
                                 "train_acc", "val_acc"])
                for r in self.records:
                    writer.writerow([r.epoch, repr(r.train_loss),
                                     repr(r.val_loss), repr(r.train_accuracy),
                                     repr(r.val_accuracy)])
        except OSError as exc:
            raise IoFailure(path, exc) from exc


class EarlyStopper:
    """Stops training after `patience` epochs without strict improvement.

    Improvement means the monitored value got strictly better (lower loss,
    higher accuracy). Each improvement resets the counter and marks the
    epoch as the new best.
    """

    def __init__(self, monitor: str = MONITOR_VAL_LOSS, patience: int = 5):
        self.monitor = monitor
        self.patience = patience
        self.best_value: Optional[float] = None
        self.best_epoch = 0
        self.stale = 0

    def improved(self, value: float) -> bool:
        if self.best_value is None:
            return True
        if self.monitor == MONITOR_VAL_LOSS:
            return value < self.best_value
        return value > self.best_value

    def update(self, epoch: int, value: float) -> bool:
        """Record one epoch; returns True when training should stop."""
        if self.improved(value):
            self.best_value = value
            self.best_epoch = epoch
            self.stale = 0
        else:
            self.stale += 1
        return self.stale >= self.patience


def _epoch_loss_and_accuracy(model: ModelState, x: np.ndarray, y: np.ndarray,
                             batch_size: int) -> tuple[float, float]:
    """Dataset-mean loss and accuracy, computed in inference mode."""
    total_loss = 0.0
    correct = 0
    n = x.shape[0]
    for start in range(0, n, batch_size):
        xb = x[start : start + batch_size]
        yb = y[start : start + batch_size]
        probs, _ = forward(model, xb)
        p_bot = probs[:, BOT_CLASS]
        total_loss += ops.cross_entropy(p_bot, yb) * xb.shape[0]
        correct += int(np.sum((p_bot >= 0.5).astype(np.int64) == yb))
    return total_loss / n, correct / n


def train(model: ModelState,
          train_x: np.ndarray, train_y: np.ndarray,
          val_x: np.ndarray, val_y: np.ndarray,
          config: TrainConfig = TrainConfig(),
          on_epoch: Optional[Callable[[EpochRecord], None]] = None,
          ) -> TrainHistory:
    """Fit the model in place; returns the per-epoch history.

    Inputs are uint8 image stacks (N, S, S) and integer labels (1 = bot).
    Validation is scored after each epoch; when training ends, the
    parameters from the best validation epoch are restored.
    """
    if train_x.shape[0] == 0:
        raise EmptySplit("training split is empty")
    if val_x.shape[0] == 0:
        raise EmptySplit("validation split is empty")
    xt = normalize_pixels(train_x, model.dtype)[:, None, :, :]
    xv = normalize_pixels(val_x, model.dtype)[:, None, :, :]
    yt = np.asarray(train_y, dtype=np.int64)
    yv = np.asarray(val_y, dtype=np.int64)

    rng = np.random.default_rng(config.seed)
    velocity = [{k: np.zeros_like(v) for k, v in p.items()}
                for p in model.params]
    stopper = EarlyStopper(config.monitor, config.patience)
    history = TrainHistory()
    best_params = model.copy_params()
    history.stop_reason = "max_epochs"

    for epoch in range(1, config.max_epochs + 1):
        order = rng.permutation(xt.shape[0])
        for start in range(0, xt.shape[0], config.batch_size):
            idx = order[start : start + config.batch_size]
            xb, yb = xt[idx], yt[idx]
            probs, caches = forward(model, xb, keep_caches=True)
            batch_loss = ops.cross_entropy(probs[:, BOT_CLASS], yb)
            if not np.isfinite(batch_loss):
                raise NonFiniteLoss(
                    f"non-finite training loss at epoch {epoch}"
                )
            grads = backward(model, caches, probs, yb)
            for p, v, g in zip(model.params, velocity, grads):
                for key in p:
                    v[key] = config.momentum * v[key] - config.learning_rate * g[key]
                    p[key] += v[key]

        train_loss, train_acc = _epoch_loss_and_accuracy(
            model, xt, yt, config.batch_size)
        val_loss, val_acc = _epoch_loss_and_accuracy(
            model, xv, yv, config.batch_size)
        if not (np.isfinite(val_loss) and np.isfinite(train_loss)):
            raise NonFiniteLoss(f"non-finite epoch loss at epoch {epoch}")
        record = EpochRecord(epoch, float(train_loss), float(train_acc),
                             float(val_loss), float(val_acc))
        history.records.append(record)
        if on_epoch is not None:
            on_epoch(record)

        monitored = val_loss if config.monitor == MONITOR_VAL_LOSS else val_acc
        was_best = stopper.improved(monitored)
        should_stop = stopper.update(epoch, monitored)
        if was_best:
            best_params = model.copy_params()
        if should_stop:
            history.stop_reason = "early_stopping"
            break

    history.best_epoch = stopper.best_epoch
    model.set_params(best_params)
    return history


@dataclass(frozen=True)
class EvalResult:
    confusion: ConfusionMatrix
    report: MetricsReport
    loss: float
    p_bot: np.ndarray
    predictions: np.ndarray  # 1 = bot


def evaluate(model: ModelState, x: np.ndarray, y: np.ndarray,
             batch_size: int = 32) -> EvalResult:
    """Score a labeled split: confusion counts, metrics, mean loss."""
    if x.shape[0] == 0:
        raise EmptySplit("evaluation split is empty")
    xn = normalize_pixels(x, model.dtype)[:, None, :, :]
    yn = np.asarray(y, dtype=np.int64)
    chunks = []
    for start in range(0, xn.shape[0], batch_size):
        probs, _ = forward(model, xn[start : start + batch_size])
        chunks.append(probs[:, BOT_CLASS])
    p_bot = np.concatenate(chunks)
    loss = ops.cross_entropy(p_bot, yn)
    preds = (p_bot >= 0.5).astype(np.int64)
    cm = confusion([LABEL_BOT if p else LABEL_HUMAN for p in preds],
                   [LABEL_BOT if t else LABEL_HUMAN for t in yn])
    return EvalResult(confusion=cm, report=compute_metrics(cm),
                      loss=float(loss), p_bot=p_bot, predictions=preds)
