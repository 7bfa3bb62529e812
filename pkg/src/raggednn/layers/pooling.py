"""Graph readouts (segment reductions, set2set) and top-k pooling."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from .. import autodiff as ad
from .. import kernels
from ..autodiff import Node
from ..batch import DisjointBatch
from ..exceptions import ContractError, GraphValidationError, NotRegisteredError
from .base import GRUCell, Layer
from .message_passing import NodeState

READOUTS = ("sum", "mean", "max", "set2set")


def readout_reduce(state: NodeState, reducer: str = "mean") -> Node:
    """Per-graph ``(B, F_h)`` reduction of the node rows."""
    if reducer not in kernels.REDUCERS:
        raise NotRegisteredError("readout", reducer, list(kernels.REDUCERS))
    return ad.segment_reduce(state.h, state.graph_ids(), state.num_graphs, reducer)


class Set2Set(Layer):
    """Attention readout iterating a recurrent query over each graph's nodes.

    Output width is ``2 * width``: the final query concatenated with the
    attention-weighted node sum.
    """

    def __init__(self, width: int, steps: int = 3, rng: np.random.Generator | None = None):
        if steps < 1:
            raise ContractError(f"set2set needs steps >= 1, got {steps}", detail="steps")
        self.width = width
        self.steps = steps
        self.cell = GRUCell(2 * width, width, rng)

    @property
    def out_width(self) -> int:
        return 2 * self.width

    def __call__(self, state: NodeState) -> Node:
        tape, h = state.h.tape, state.h
        b = state.num_graphs
        gid = state.graph_ids()
        q_star = tape.constant(np.zeros((b, 2 * self.width)))
        hidden = tape.constant(np.zeros((b, self.width)))
        for _ in range(self.steps):
            hidden = self.cell(q_star, hidden)
            scores = ad.row_sum(h * ad.gather_rows(hidden, gid))
            alpha = ad.segment_softmax(scores, gid, b)
            r = ad.segment_sum(ad.scale_rows(h, alpha), gid, b)
            q_star = ad.concat([hidden, r])
        return q_star


@dataclass(frozen=True)
class PoolResult:
    """Outcome of one top-k pooling step.

    ``kept`` lists the surviving original node rows, grouped by graph and in
    descending score order within each graph; it is the map `topk_unpool`
    scatters back through.
    """

    state: NodeState
    kept: np.ndarray
    batch: DisjointBatch
    scores: np.ndarray


def _keep_counts(counts: np.ndarray, ratio: float) -> np.ndarray:
    # the small offset keeps ratio * count from rounding up past an exact integer
    return np.ceil(ratio * counts - 1e-9).astype(np.int64)


def topk_pool(state: NodeState, d: DisjointBatch, p: Node, ratio: float) -> PoolResult:
    """Keep the ``ceil(ratio * N_b)`` best-scoring nodes of every graph.

    Scores are ``y = h . p / ||p||``; kept rows are gated by ``tanh(y)`` and
    edges touching a dropped node are removed. Equal scores keep the lower
    node index.

    Raises:
        ContractError: if ``ratio`` is outside ``(0, 1]`` or ``p`` is zero.
    """
    if not 0.0 < ratio <= 1.0:
        raise ContractError(f"pool ratio must lie in (0, 1], got {ratio}", detail="ratio")
    h = state.h
    y = ad.matmul(h, ad.normalize(p))
    scores = y.value[:, 0]
    n = scores.shape[0]
    gid = state.graph_ids()
    splits = state.row_splits

    order = np.lexsort((np.arange(n), -scores, gid))
    rank = np.arange(n) - splits[:-1][gid[order]]
    keep = _keep_counts(np.diff(splits), ratio)
    kept = order[rank < keep[gid[order]]]

    gated = ad.scale_rows(ad.gather_rows(h, kept), ad.tanh(ad.gather_rows(y, kept)))

    position = np.full(n, -1, dtype=np.int64)
    position[kept] = np.arange(kept.shape[0])
    pairs = d.edge_index_global
    survives = (position[pairs[:, 0]] >= 0) & (position[pairs[:, 1]] >= 0)
    pooled = DisjointBatch(
        node_matrix=gated.value,
        edge_index_global=position[pairs[survives]],
        node_graph_id=gid[kept],
        edge_graph_id=d.edge_graph_id[survives],
        num_graphs=d.num_graphs,
        edge_matrix=None if d.edge_matrix is None else d.edge_matrix[survives],
        state=d.state,
    )
    new_splits = np.concatenate([[0], np.cumsum(np.minimum(keep, np.diff(splits)))])
    return PoolResult(
        state=NodeState(gated, new_splits.astype(np.int64)),
        kept=kept,
        batch=pooled,
        scores=scores[kept],
    )


def topk_unpool(h: Node, kept: Any, num_nodes: int) -> Node:
    """Scatter pooled rows back to their original positions; dropped rows are zero."""
    kept = kernels.check_index_vector(kept, num_nodes, name="kept")
    if kept.shape[0] != h.shape[0]:
        raise GraphValidationError(
            f"{kept.shape[0]} kept indices for {h.shape[0]} pooled rows", detail="kept"
        )
    if np.unique(kept).shape[0] != kept.shape[0]:
        raise GraphValidationError("kept indices must be distinct", detail="kept")
    return ad.segment_sum(h, kept, num_nodes)
