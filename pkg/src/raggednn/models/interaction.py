"""Interaction network: relational edge updates followed by object updates."""

from __future__ import annotations

import numpy as np

from ..autodiff import Node, Tape
from ..batch import DisjointBatch
from ..layers import ConcatMLP, NodeState, interaction_block
from .base import GraphModel


class InteractionModel(GraphModel):
    name = "interaction"

    def build(self, rng: np.random.Generator) -> None:
        spec = self.spec
        node_w, edge_w = spec.widths.node, self.require_edges()
        self.relational: list[ConcatMLP] = []
        self.objects: list[ConcatMLP] = []
        for width in spec.layers:
            self.relational.append(
                ConcatMLP([2 * node_w + edge_w, spec.widths.mlp, width], spec.activation, rng)
            )
            self.objects.append(
                ConcatMLP([node_w + width, spec.widths.mlp, width], spec.activation, rng)
            )
            node_w = edge_w = width
        self.node_width = node_w

    def encode(self, tape: Tape, d: DisjointBatch) -> tuple[NodeState, Node | None]:
        h = tape.constant(d.node_matrix)
        e = self.edge_input(tape, d)
        for phi_r, phi_o in zip(self.relational, self.objects):
            e, h = interaction_block(h, d, phi_r, phi_o, e)
        return NodeState(h, d.node_splits()), None
