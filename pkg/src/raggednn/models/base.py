"""Abstract base class for graph models."""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import ClassVar

import numpy as np

from .. import autodiff as ad
from ..autodiff import Node, Tape
from ..batch import DisjointBatch, GraphBatch, to_disjoint
from ..exceptions import ConfigError
from ..layers import MLP, DenseLayer, Layer, NodeState, Set2Set, readout_reduce
from ..ragged import Ragged
from ..schemas import ModelSpec


class GraphModel(Layer, ABC):
    """
    Abstract base class for every architecture built from a ModelSpec.

    Subclasses create their layers in `build` and turn a disjoint batch into
    a final node representation in `encode`. The base class owns the task
    head: a per-node dense layer for node tasks, a readout followed by an MLP
    for graph tasks.
    """

    name: ClassVar[str]

    def __init__(self, spec: ModelSpec):
        for field in ("node", "output"):
            if getattr(spec.widths, field) is None:
                raise ConfigError(
                    f"widths.{field} is not set; resolve the ModelSpec against a dataset first",
                    detail=f"widths.{field}",
                )
        self.spec = spec
        rng = np.random.default_rng(spec.seed)
        self.node_width = 0
        self.extra_width = 0
        self.build(rng)
        self._frozen = False

        out = spec.widths.output
        if spec.is_node_task:
            self.head: Layer = DenseLayer(self.node_width, out, "linear", rng)
            self.set2set = None
        else:
            readout_width = self.node_width
            self.set2set = None
            if spec.resolved_readout == "set2set":
                self.set2set = Set2Set(self.node_width, spec.set2set_steps, rng)
                readout_width = self.set2set.out_width
            self.head = MLP(
                [readout_width + self.extra_width, spec.widths.mlp, out],
                spec.activation,
                rng,
                out_activation="linear",
            )

    @property
    def input_edge_width(self) -> int:
        return self.spec.widths.edge or 0

    def check_uniform_width(self) -> int:
        """Architectures with residual or skip paths need one hidden width throughout."""
        width = self.spec.layers[0]
        for k, w in enumerate(self.spec.layers):
            if w != width:
                raise ConfigError(
                    f"{self.name}: layers[{k}] has width {w}, expected {width} "
                    "(all hidden widths must be equal)",
                    detail=f"layers[{k}]",
                )
        return width

    def require_edges(self) -> int:
        if self.input_edge_width < 1:
            raise ConfigError(
                f"{self.name} needs edge features (widths.edge >= 1)", detail="widths.edge"
            )
        return self.input_edge_width

    @abstractmethod
    def build(self, rng: np.random.Generator) -> None:
        """Create the layers and set ``node_width`` (and ``extra_width`` if any)."""
        ...

    @abstractmethod
    def encode(self, tape: Tape, d: DisjointBatch) -> tuple[NodeState, Node | None]:
        """Final node representation plus optional extra per-graph features."""
        ...

    def forward(self, tape: Tape, batch: GraphBatch | DisjointBatch) -> Node:
        """Predictions on ``tape``: ``(N_total, C)`` for node tasks, ``(B, out)`` otherwise."""
        d = to_disjoint(batch) if isinstance(batch, GraphBatch) else batch
        state, extra = self.encode(tape, d)
        if self.spec.is_node_task:
            return self.head(state.h)
        if self.set2set is not None:
            pooled = self.set2set(state)
        else:
            pooled = readout_reduce(state, self.spec.resolved_readout)
        if extra is not None:
            pooled = ad.concat([pooled, extra])
        return self.head(pooled)

    def predict(self, batch: GraphBatch) -> Ragged | np.ndarray:
        """Evaluate on a fresh tape; node tasks come back ragged ``(B, None, C)``."""
        out = self.forward(Tape(), batch).value
        if self.spec.is_node_task:
            return Ragged(out, batch.nodes.row_splits)
        return np.array(out)

    __call__ = predict

    @staticmethod
    def edge_input(tape: Tape, d: DisjointBatch) -> Node | None:
        return None if d.edge_matrix is None else tape.constant(d.edge_matrix)

    @property
    def frozen(self) -> bool:
        return self._frozen

    def freeze(self) -> None:
        """Inference mode: parameter arrays become read-only."""
        for var in self.parameters():
            var.value.flags.writeable = False
        self._frozen = True

    def unfreeze(self) -> None:
        for var in self.parameters():
            var.value.flags.writeable = True
        self._frozen = False

    def __repr__(self) -> str:
        count = sum(var.value.size for var in self.parameters())
        return f"{type(self).__name__}(task={self.spec.task}, parameters={count})"
