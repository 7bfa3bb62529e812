"""Graph U-Net: top-k pooling down, scatter unpooling up, additive skips."""

from __future__ import annotations

import numpy as np

from ..autodiff import Node, Tape, Variable
from ..batch import DisjointBatch
from ..layers import DenseLayer, NodeState, gcn_adjacency, gcn_conv, topk_pool, topk_unpool
from .base import GraphModel


class UNetModel(GraphModel):
    """
    ``pool_levels`` of {graph convolution, top-k pool}, a bottom convolution,
    then the mirrored {unpool, add skip, graph convolution}.
    """

    name = "unet"

    def build(self, rng: np.random.Generator) -> None:
        spec = self.spec
        hidden = self.check_uniform_width()
        act = spec.activation
        levels = range(spec.pool_levels)
        self.input_conv = DenseLayer(spec.widths.node, hidden, act, rng)
        self.down_convs = [DenseLayer(hidden, hidden, act, rng) for _ in levels]
        self.projections = [
            Variable(rng.normal(size=(hidden, 1)), name=f"p{level}") for level in levels
        ]
        self.bottom_conv = DenseLayer(hidden, hidden, act, rng)
        self.up_convs = [DenseLayer(hidden, hidden, act, rng) for _ in levels]
        self.node_width = hidden

    def encode(self, tape: Tape, d: DisjointBatch) -> tuple[NodeState, Node | None]:
        splits = d.node_splits()
        a_norm = gcn_adjacency(d)
        state = NodeState(gcn_conv(tape.constant(d.node_matrix), a_norm, self.input_conv), splits)
        skips = []
        for conv, p in zip(self.down_convs, self.projections):
            state = state.with_h(gcn_conv(state.h, a_norm, conv))
            pooled = topk_pool(state, d, tape.watch(p), self.spec.pool_ratio)
            skips.append((state.h, a_norm, d.num_nodes, pooled.kept))
            state, d = pooled.state, pooled.batch
            a_norm = gcn_adjacency(d)

        h = gcn_conv(state.h, a_norm, self.bottom_conv)
        for conv, (skip, skip_a, num_nodes, kept) in zip(
            reversed(self.up_convs), reversed(skips)
        ):
            h = gcn_conv(topk_unpool(h, kept, num_nodes) + skip, skip_a, conv)
        return NodeState(h, splits), None
