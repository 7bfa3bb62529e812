"""MegNet-style graph network with edge, node and global-state updates."""

from __future__ import annotations

import numpy as np

from .. import autodiff as ad
from ..autodiff import Node, Tape
from ..batch import DisjointBatch
from ..layers import ConcatMLP, DenseLayer, NodeState, megnet_block
from .base import GraphModel


class MegNetModel(GraphModel):
    """
    Encoders for nodes, edges and state, then blocks of mean-aggregated
    updates. The graph head sees the node readout, the mean edge and the state.
    A batch without state gets a zero state of width ``max(widths.state, 1)``.
    """

    name = "megnet"

    def build(self, rng: np.random.Generator) -> None:
        spec = self.spec
        hidden = self.check_uniform_width()
        edge_w = self.require_edges()
        self.state_width = max(spec.widths.state or 0, 1)
        act, mlp = spec.activation, spec.widths.mlp
        self.node_encoder = DenseLayer(spec.widths.node, hidden, act, rng)
        self.edge_encoder = DenseLayer(edge_w, hidden, act, rng)
        self.state_encoder = DenseLayer(self.state_width, hidden, act, rng)
        self.phi_e = [ConcatMLP([4 * hidden, mlp, hidden], act, rng) for _ in spec.layers]
        self.phi_v = [ConcatMLP([3 * hidden, mlp, hidden], act, rng) for _ in spec.layers]
        self.phi_u = [ConcatMLP([3 * hidden, mlp, hidden], act, rng) for _ in spec.layers]
        self.node_width = hidden
        self.extra_width = 2 * hidden

    def encode(self, tape: Tape, d: DisjointBatch) -> tuple[NodeState, Node | None]:
        state = d.state if d.state is not None else np.zeros((d.num_graphs, self.state_width))
        h = self.node_encoder(tape.constant(d.node_matrix))
        e = self.edge_input(tape, d)
        e = None if e is None else self.edge_encoder(e)
        u = self.state_encoder(tape.constant(state))
        for phi_e, phi_v, phi_u in zip(self.phi_e, self.phi_v, self.phi_u):
            e, h, u = megnet_block(h, d, e, u, phi_e, phi_v, phi_u)
        extra = None
        if e is not None:
            extra = ad.concat([ad.segment_mean(e, d.edge_graph_id, d.num_graphs), u])
        return NodeState(h, d.node_splits()), extra
