"""Losses, optimizers, training loops and checkpoints."""

from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .losses import TASK_LOSSES, compute_loss, task_metric
from .optim import SGD, Adam, Optimizer, OptimizerState, adam_step, make_optimizer, sgd_step
from .trainer import EpochMetrics, evaluate, fit, train_epoch

__all__ = [
    "Adam",
    "Checkpoint",
    "EpochMetrics",
    "Optimizer",
    "OptimizerState",
    "SGD",
    "TASK_LOSSES",
    "adam_step",
    "compute_loss",
    "evaluate",
    "fit",
    "load_checkpoint",
    "make_optimizer",
    "save_checkpoint",
    "sgd_step",
    "task_metric",
    "train_epoch",
]
