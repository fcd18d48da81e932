"""Matplotlib reports saved next to the CSV outputs: loss curves and
confusion matrices. Uses the Agg backend so rendering works headless."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np

from .errors import IoFailure
from .metrics import ConfusionMatrix
from .nn.train import TrainHistory


def save_loss_curves(history: TrainHistory, destination) -> Path:
    """Train/validation loss and accuracy per epoch, one PNG."""
    path = Path(destination)
    epochs = history.column("epoch")
    fig, (ax_loss, ax_acc) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_loss.plot(epochs, history.column("train_loss"), label="train")
    ax_loss.plot(epochs, history.column("val_loss"), label="validation")
    if history.best_epoch:
        ax_loss.axvline(history.best_epoch, color="gray", linestyle=":",
                        label=f"best epoch ({history.best_epoch})")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("cross-entropy loss")
    ax_loss.legend()
    ax_acc.plot(epochs, history.column("train_accuracy"), label="train")
    ax_acc.plot(epochs, history.column("val_accuracy"), label="validation")
    ax_acc.set_xlabel("epoch")
    ax_acc.set_ylabel("accuracy")
    ax_acc.set_ylim(0.0, 1.05)
    ax_acc.legend()
    fig.tight_layout()
    try:
        fig.savefig(path, dpi=100)
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    finally:
        plt.close(fig)
    return path


def save_confusion_matrix(cm: ConfusionMatrix, destination,
                          title: str = "Confusion matrix") -> Path:
    """2x2 heatmap with counts; rows are truth, columns are prediction."""
    path = Path(destination)
    grid = np.array([[cm.tp, cm.fn], [cm.fp, cm.tn]], dtype=np.int64)
    fig, ax = plt.subplots(figsize=(4, 3.5))
    image = ax.imshow(grid, cmap="Blues")
    ax.set_xticks([0, 1], ["bot", "human"])
    ax.set_yticks([0, 1], ["bot", "human"])
    ax.set_xlabel("predicted")
    ax.set_ylabel("actual")
    ax.set_title(title)
    threshold = grid.max() / 2 if grid.max() else 0.5
    for r in range(2):
        for c in range(2):
            color = "white" if grid[r, c] > threshold else "black"
            ax.text(c, r, str(grid[r, c]), ha="center", va="center",
                    color=color)
    fig.colorbar(image, ax=ax)
    fig.tight_layout()
    try:
        fig.savefig(path, dpi=100)
    except OSError as exc:
        raise IoFailure(path, exc) from exc
    finally:
        plt.close(fig)
    return path
