"""First-order optimizers over named model parameters."""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from ..autodiff import Variable
from ..exceptions import ContractError, NotRegisteredError, NumericError
from ..models import GraphModel
from ..schemas import OptimizerConfig

NamedParams = Sequence[tuple[str, Variable]]


@dataclass
class OptimizerState:
    """Hyperparameters, step count and per-parameter moment buffers."""

    kind: Literal["sgd", "adam"] = "adam"
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def from_config(cls, config: OptimizerConfig) -> OptimizerState:
        return cls(
            kind=config.kind,
            lr=config.lr,
            beta1=config.beta1,
            beta2=config.beta2,
            epsilon=config.epsilon,
        )


def _check_grads(params: NamedParams) -> None:
    for name, var in params:
        if not var.value.flags.writeable:
            raise ContractError(f"parameter {name} is frozen", detail=name)
        if not np.all(np.isfinite(var.grad)):
            bad = int(np.sum(~np.isfinite(var.grad)))
            raise NumericError(
                f"non-finite gradient in parameter {name} ({bad} of {var.grad.size} entries)",
                detail=name,
            )


def adam_step(state: OptimizerState, params: NamedParams) -> None:
    """Bias-corrected Adam update in place; ``state.step`` advances by one."""
    _check_grads(params)
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    for name, var in params:
        g = var.grad
        m = state.m.get(name, np.zeros_like(g))
        v = state.v.get(name, np.zeros_like(g))
        m = b1 * m + (1.0 - b1) * g
        v = b2 * v + (1.0 - b2) * g * g
        state.m[name], state.v[name] = m, v
        m_hat = m / (1.0 - b1**t)
        v_hat = v / (1.0 - b2**t)
        var.value -= state.lr * m_hat / (np.sqrt(v_hat) + state.epsilon)


def sgd_step(state: OptimizerState, params: NamedParams) -> None:
    _check_grads(params)
    state.step += 1
    for _, var in params:
        var.value -= state.lr * var.grad


class Optimizer(ABC):
    """Owns an OptimizerState and applies it to a model's gradients."""

    kind: str

    def __init__(self, state: OptimizerState | None = None, **hyper: float):
        self.state = state if state is not None else OptimizerState(kind=self.kind, **hyper)

    def step(self, model: GraphModel) -> None:
        if model.frozen:
            raise ContractError("cannot update a frozen model", detail="frozen")
        self.apply(model.named_parameters())

    @abstractmethod
    def apply(self, params: NamedParams) -> None:
        ...


class Adam(Optimizer):
    kind = "adam"

    def apply(self, params: NamedParams) -> None:
        adam_step(self.state, params)


class SGD(Optimizer):
    kind = "sgd"

    def apply(self, params: NamedParams) -> None:
        sgd_step(self.state, params)


OPTIMIZER_CLASSES: dict[str, type[Optimizer]] = {"adam": Adam, "sgd": SGD}


def make_optimizer(state: OptimizerState) -> Optimizer:
    optimizer_class = OPTIMIZER_CLASSES.get(state.kind)
    if optimizer_class is None:
        raise NotRegisteredError("optimizer", state.kind, sorted(OPTIMIZER_CLASSES))
    return optimizer_class(state)
