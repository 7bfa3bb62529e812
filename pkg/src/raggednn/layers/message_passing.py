"""Neighbourhood message passing and the edge-centric blocks built on it.

All functions work on the disjoint layout: messages travel from the sender
column of ``edge_index_global`` to the receiver column and are summed (or
averaged) per receiver with the segment kernels. A node without incoming
edges receives exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .. import autodiff as ad
from ..autodiff import Node, Tape
from ..batch import DisjointBatch
from ..exceptions import ConfigError, ContractError

MessageFn = Callable[[Node, Node, "Node | None"], Node]
UpdateFn = Callable[[Node, Node], Node]


@dataclass(frozen=True)
class NodeState:
    """Hidden node representation with the partition of its batch."""

    h: Node
    row_splits: np.ndarray

    @classmethod
    def from_batch(cls, tape: Tape, d: DisjointBatch) -> NodeState:
        return cls(tape.constant(d.node_matrix), d.node_splits())

    @property
    def num_graphs(self) -> int:
        return int(self.row_splits.shape[0] - 1)

    def graph_ids(self) -> np.ndarray:
        return np.repeat(np.arange(self.num_graphs, dtype=np.int64), np.diff(self.row_splits))

    def with_h(self, h: Node) -> NodeState:
        return NodeState(h, self.row_splits)


@dataclass
class MessagePassingConfig:
    """Message functions ``M_t`` and update functions ``U_t`` for ``steps`` rounds.

    With ``shared_weights`` one function pair serves every step; otherwise one
    pair per step is required.
    """

    message_fns: Sequence[MessageFn]
    update_fns: Sequence[UpdateFn]
    steps: int = 3
    shared_weights: bool = True

    def __post_init__(self) -> None:
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}", detail="steps")
        expected = 1 if self.shared_weights else self.steps
        if len(self.message_fns) != expected or len(self.update_fns) != expected:
            raise ConfigError(
                f"expected {expected} message/update function(s), got "
                f"{len(self.message_fns)}/{len(self.update_fns)}",
                detail="steps",
            )

    def message_fn(self, t: int) -> MessageFn:
        return self.message_fns[0 if self.shared_weights else t]

    def update_fn(self, t: int) -> UpdateFn:
        return self.update_fns[0 if self.shared_weights else t]


def message_aggregate(
    h: Node, d: DisjointBatch, message_fn: MessageFn, edge_feats: Node | None = None
) -> Node:
    """``m_i = sum over edges k into i of M(h_i, h_j(k), e_k)``."""
    h_i = ad.gather_rows(h, d.receivers)
    h_j = ad.gather_rows(h, d.senders)
    messages = message_fn(h_i, h_j, edge_feats)
    return ad.segment_sum(messages, d.receivers, d.num_nodes)


def message_pass_step(
    state: NodeState,
    d: DisjointBatch,
    cfg: MessagePassingConfig,
    t: int,
    edge_feats: Node | None = None,
) -> NodeState:
    """One round ``h' = U_t(h, m)``; the partition is unchanged."""
    if not 0 <= t < cfg.steps:
        raise ContractError(f"step {t} outside [0, {cfg.steps})", detail="t")
    m = message_aggregate(state.h, d, cfg.message_fn(t), edge_feats)
    return state.with_h(cfg.update_fn(t)(state.h, m))


def message_passing(
    state: NodeState, d: DisjointBatch, cfg: MessagePassingConfig, edge_feats: Node | None = None
) -> NodeState:
    for t in range(cfg.steps):
        state = message_pass_step(state, d, cfg, t, edge_feats)
    return state


def interaction_block(
    h: Node,
    d: DisjointBatch,
    phi_r: Callable[[Node, Node, Node], Node],
    phi_o: Callable[[Node, Node], Node],
    edge_feats: Node | None,
) -> tuple[Node, Node]:
    """Relational update of every edge, then object update from the summed effects."""
    if edge_feats is None:
        raise ContractError("interaction block needs edge features", detail="edges")
    effects = phi_r(ad.gather_rows(h, d.receivers), ad.gather_rows(h, d.senders), edge_feats)
    aggregated = ad.segment_sum(effects, d.receivers, d.num_nodes)
    return effects, phi_o(h, aggregated)


def megnet_block(
    h: Node,
    d: DisjointBatch,
    edge_feats: Node | None,
    state: Node | None,
    phi_e: Callable[[Node, Node, Node, Node], Node],
    phi_v: Callable[[Node, Node, Node], Node],
    phi_u: Callable[[Node, Node, Node], Node],
) -> tuple[Node, Node, Node]:
    """Edge, node and graph-state updates, each aggregated by mean.

    ``phi_e(h_i, h_j, e, u)``, ``phi_v(mean incoming e', h, u)`` and
    ``phi_u(mean e', mean h', u)``; ``u`` is broadcast to the rows of its graph.
    """
    if state is None:
        raise ContractError("megnet block needs a graph state", detail="state")
    if edge_feats is None:
        raise ContractError("megnet block needs edge features", detail="edges")
    u_edges = ad.gather_rows(state, d.edge_graph_id)
    e_new = phi_e(
        ad.gather_rows(h, d.receivers), ad.gather_rows(h, d.senders), edge_feats, u_edges
    )
    incoming = ad.segment_mean(e_new, d.receivers, d.num_nodes)
    h_new = phi_v(incoming, h, ad.gather_rows(state, d.node_graph_id))
    e_mean = ad.segment_mean(e_new, d.edge_graph_id, d.num_graphs)
    h_mean = ad.segment_mean(h_new, d.node_graph_id, d.num_graphs)
    return e_new, h_new, phi_u(e_mean, h_mean, state)
