"""Message passing network with a recurrent or MLP update."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..autodiff import Node, Tape
from ..batch import DisjointBatch
from ..layers import (
    ConcatMLP,
    DenseLayer,
    GRUCell,
    MessagePassingConfig,
    NodeState,
    message_passing,
)
from .base import GraphModel


def _as_update(fn: GRUCell | ConcatMLP) -> Callable[[Node, Node], Node]:
    """Adapt a layer to the ``U(h, m)`` calling convention."""
    if isinstance(fn, GRUCell):
        return lambda h, m: fn(m, h)
    return lambda h, m: fn(h, m)


class MPNModel(GraphModel):
    """
    Embeds nodes, runs ``steps`` rounds of ``h' = U(h, sum M(h_i, h_j, e))``
    and reads out (set2set by default).
    """

    name = "mpn"

    def build(self, rng: np.random.Generator) -> None:
        spec = self.spec
        hidden = self.check_uniform_width()
        edge_w = self.input_edge_width
        count = 1 if spec.shared_weights else spec.steps
        self.embed = DenseLayer(spec.widths.node, hidden, spec.activation, rng)
        self.messages = [
            ConcatMLP(
                [2 * hidden + edge_w, spec.widths.mlp, hidden],
                spec.activation,
                rng,
                out_activation="linear",
            )
            for _ in range(count)
        ]
        if spec.update == "gru":
            self.updates: list[GRUCell | ConcatMLP] = [
                GRUCell(hidden, hidden, rng) for _ in range(count)
            ]
        else:
            self.updates = [
                ConcatMLP([2 * hidden, spec.widths.mlp, hidden], spec.activation, rng)
                for _ in range(count)
            ]
        self.node_width = hidden

    def encode(self, tape: Tape, d: DisjointBatch) -> tuple[NodeState, Node | None]:
        cfg = MessagePassingConfig(
            message_fns=self.messages,
            update_fns=[_as_update(fn) for fn in self.updates],
            steps=self.spec.steps,
            shared_weights=self.spec.shared_weights,
        )
        edge_feats = self.edge_input(tape, d) if self.input_edge_width else None
        state = NodeState(self.embed(tape.constant(d.node_matrix)), d.node_splits())
        return message_passing(state, d, cfg, edge_feats), None
