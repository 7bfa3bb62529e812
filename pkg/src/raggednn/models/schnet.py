"""SchNet-style continuous-filter convolution network."""

from __future__ import annotations

import numpy as np

from ..autodiff import Node, Tape
from ..batch import DisjointBatch
from ..layers import MLP, DenseLayer, NodeState, schnet_interaction
from .base import GraphModel


class SchNetModel(GraphModel):
    """
    Residual interaction blocks over gaussian-expanded distances.

    The output MLP of every block has no biases and ends linearly, and
    shifted softplus maps 0 to 0, so a node without neighbours passes
    through a block unchanged.
    """

    name = "schnet"

    def build(self, rng: np.random.Generator) -> None:
        spec = self.spec
        hidden = self.check_uniform_width()
        edge_w = self.require_edges()
        self.embed = DenseLayer(spec.widths.node, hidden, "linear", rng)
        self.filters = [
            MLP([edge_w, hidden, hidden], "shifted_softplus", rng) for _ in spec.layers
        ]
        self.atom_in = [
            DenseLayer(hidden, hidden, "linear", rng, use_bias=False) for _ in spec.layers
        ]
        self.atom_out = [
            MLP(
                [hidden, hidden, hidden],
                "shifted_softplus",
                rng,
                out_activation="linear",
                use_bias=False,
            )
            for _ in spec.layers
        ]
        self.atomwise = DenseLayer(hidden, hidden, "shifted_softplus", rng)
        self.node_width = hidden

    def encode(self, tape: Tape, d: DisjointBatch) -> tuple[NodeState, Node | None]:
        x = self.embed(tape.constant(d.node_matrix))
        e = self.edge_input(tape, d)
        for filter_fn, in_fn, out_fn in zip(self.filters, self.atom_in, self.atom_out):
            x = schnet_interaction(x, d, e, filter_fn, in_fn, out_fn)
        return NodeState(self.atomwise(x), d.node_splits()), None
