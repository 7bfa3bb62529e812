"""Training losses recorded on the tape, and plain-numpy task metrics."""

from __future__ import annotations

from typing import Any

import numpy as np

from .. import autodiff as ad
from ..autodiff import Node
from ..batch import GraphBatch
from ..exceptions import ConfigError, DimensionError, NotRegisteredError

LOSSES = ("mae", "mse", "softmax_ce")

TASK_LOSSES: dict[str, str] = {
    "graph_regression": "mae",
    "graph_classification": "softmax_ce",
    "node_classification": "softmax_ce",
}


def compute_loss(kind: str, pred: Node, target: Any) -> Node:
    """Mean loss over batch elements as a ``(1, 1)`` node.

    For ``softmax_ce`` the target is a vector of class ids; rows labeled -1
    are ignored. The ``abs`` subgradient at zero is zero.
    """
    if kind == "softmax_ce":
        labels = np.asarray(target, dtype=np.int64).reshape(-1)
        if labels.shape[0] != pred.shape[0]:
            raise DimensionError(f"{labels.shape[0]} labels for {pred.shape[0]} predictions")
        keep = np.flatnonzero(labels >= 0)
        logits = pred if keep.shape[0] == labels.shape[0] else ad.gather_rows(pred, keep)
        return ad.mean_all(ad.softmax_cross_entropy(logits, labels[keep]))
    if kind not in LOSSES:
        raise NotRegisteredError("loss", kind, list(LOSSES))

    target = np.asarray(target, dtype=np.float64)
    if target.ndim == 1 and len(pred.shape) == 2 and pred.shape[1] == 1:
        target = target.reshape(-1, 1)
    if target.shape != pred.shape:
        raise DimensionError(f"prediction {pred.shape} and target {target.shape} differ")
    diff = pred - pred.tape.constant(target)
    if kind == "mae":
        return ad.mean_all(ad.absolute(diff))
    return ad.mean_all(ad.square(diff))


def batch_target(batch: GraphBatch, task: str) -> np.ndarray:
    """Supervision array matching the model output of ``batch``."""
    if task == "node_classification":
        if batch.node_labels is None:
            raise ConfigError("batch carries no node labels", detail="node_labels")
        return batch.node_labels.flat_values[:, 0]
    if batch.targets is None:
        raise ConfigError("batch carries no graph targets", detail="targets")
    return batch.targets


def task_metric(
    task: str, preds: np.ndarray, targets: np.ndarray, target_names: list[str]
) -> dict[str, float]:
    """``mae.<name>`` per regression target, ``accuracy`` for classification."""
    if task == "graph_regression":
        if preds.shape[0] == 0:
            return {f"mae.{name}": 0.0 for name in target_names}
        errors = np.abs(preds - targets).mean(axis=0)
        return {f"mae.{name}": float(err) for name, err in zip(target_names, errors)}
    labels = np.asarray(targets, dtype=np.int64).reshape(-1)
    labeled = labels >= 0
    if not labeled.any():
        return {"accuracy": 0.0}
    hits = preds[labeled].argmax(axis=1) == labels[labeled]
    return {"accuracy": float(hits.mean())}
