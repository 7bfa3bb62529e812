"""Training and evaluation loops."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from ..autodiff import Tape, backward
from ..batch import GraphBatch
from ..exceptions import ConfigError
from ..log import get_logger
from ..models import GraphModel
from ..schemas import DatasetSpec
from .losses import batch_target, compute_loss, task_metric
from .optim import Optimizer

logger = get_logger(__name__)


@dataclass
class EpochMetrics:
    loss: float
    metric: dict[str, float] = field(default_factory=dict)


def _weight(batch: GraphBatch, task: str) -> int:
    if task == "node_classification" and batch.node_labels is not None:
        return int(np.sum(batch.node_labels.flat_values >= 0))
    return batch.num_graphs


def train_epoch(
    model: GraphModel,
    batches: Sequence[GraphBatch],
    loss_kind: str,
    optimizer: Optimizer,
    dataset: DatasetSpec,
) -> EpochMetrics:
    """One pass over ``batches`` with an optimizer step after each batch.

    The reported loss is the batch losses weighted by supervised elements;
    the metric is computed from the forward outputs seen during the pass.
    """
    task = dataset.task
    total, weight = 0.0, 0
    preds, targets = [], []
    for batch in batches:
        tape = Tape()
        model.zero_grad()
        pred = model.forward(tape, batch)
        target = batch_target(batch, task)
        loss = compute_loss(loss_kind, pred, target)
        backward(tape, loss)
        optimizer.step(model)

        w = _weight(batch, task)
        total += float(loss.value[0, 0]) * w
        weight += w
        preds.append(np.array(pred.value))
        targets.append(np.asarray(target))

    if not preds:
        return EpochMetrics(loss=0.0)
    metric = task_metric(
        task, np.concatenate(preds), np.concatenate(targets), dataset.target_names
    )
    return EpochMetrics(loss=total / max(weight, 1), metric=metric)


def predict_batches(
    model: GraphModel, batches: Sequence[GraphBatch], task: str
) -> tuple[np.ndarray, np.ndarray]:
    """Concatenated predictions and supervision over every batch."""
    preds, targets = [], []
    for batch in batches:
        preds.append(np.array(model.forward(Tape(), batch).value))
        targets.append(np.asarray(batch_target(batch, task)))
    return np.concatenate(preds), np.concatenate(targets)


def evaluate(
    model: GraphModel, batches: Sequence[GraphBatch], dataset: DatasetSpec
) -> dict[str, float]:
    """``mae.<target>`` for regression, ``accuracy`` for classification.

    Raises:
        ConfigError: if there is nothing to evaluate.
    """
    if not batches or sum(b.num_graphs for b in batches) == 0:
        raise ConfigError("no graphs to evaluate", detail="data")
    preds, targets = predict_batches(model, batches, dataset.task)
    return task_metric(dataset.task, preds, targets, dataset.target_names)


def fit(
    model: GraphModel,
    train_batches: Sequence[GraphBatch],
    val_batches: Sequence[GraphBatch],
    dataset: DatasetSpec,
    optimizer: Optimizer,
    epochs: int,
    loss_kind: str,
    metrics_path: str | Path | None = None,
) -> list[dict]:
    """Train for ``epochs`` and append one metrics line per epoch.

    The per-epoch metric is `evaluate` on ``val_batches`` (or on the training
    batches when there is no validation split). Pass them unshuffled so the metric
    matches a later `evaluate` over the same records.
    """
    history = []
    eval_batches = val_batches if val_batches else train_batches
    sink = None
    if metrics_path is not None:
        Path(metrics_path).parent.mkdir(parents=True, exist_ok=True)
        sink = Path(metrics_path).open("w", encoding="utf-8")
    try:
        for epoch in range(1, epochs + 1):
            result = train_epoch(model, train_batches, loss_kind, optimizer, dataset)
            metric = evaluate(model, eval_batches, dataset)
            line = {"epoch": epoch, "loss": result.loss, "metric": metric}
            history.append(line)
            if sink is not None:
                sink.write(json.dumps(line) + "\n")
                sink.flush()
            logger.info("epoch_completed", epoch=epoch, loss=result.loss, **metric)
    finally:
        if sink is not None:
            sink.close()
    return history
