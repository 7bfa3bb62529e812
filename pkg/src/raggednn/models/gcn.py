"""Graph convolutional network."""

from __future__ import annotations

import numpy as np

from ..autodiff import Node, Tape
from ..batch import DisjointBatch
from ..layers import DenseLayer, NodeState, gcn_adjacency, gcn_conv
from .base import GraphModel


class GCNModel(GraphModel):
    """Stack of graph convolutions, one per entry of ``layers``."""

    name = "gcn"

    def build(self, rng: np.random.Generator) -> None:
        widths = [self.spec.widths.node, *self.spec.layers]
        self.convs = [
            DenseLayer(widths[k], widths[k + 1], self.spec.activation, rng)
            for k in range(len(widths) - 1)
        ]
        self.node_width = widths[-1]

    def encode(self, tape: Tape, d: DisjointBatch) -> tuple[NodeState, Node | None]:
        a_norm = gcn_adjacency(d)
        h = tape.constant(d.node_matrix)
        for conv in self.convs:
            h = gcn_conv(h, a_norm, conv)
        return NodeState(h, d.node_splits()), None
