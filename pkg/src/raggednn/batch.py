"""Graph batch representations and the conversions between them.

Edge-index convention, used everywhere in the library: column 0 holds the
receiving node i, column 1 the sending node j, and messages flow j -> i.
Graphs are directed; undirected data stores both directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .exceptions import DimensionError, GraphValidationError
from .ragged import Ragged, _frozen, ragged_from_rows


def _empty_pairs(splits: np.ndarray) -> Ragged:
    return Ragged(np.zeros((0, 2), dtype=np.int64), splits)


@dataclass(frozen=True, eq=False)
class GraphBatch:
    """Ragged mini-batch of B graphs.

    ``targets`` carries per-graph supervision: a float matrix ``(B, T)`` for
    regression or an int vector ``(B,)`` of class ids. ``node_labels`` is a
    ragged int column aligned with ``nodes``; -1 marks an unlabeled node.
    """

    nodes: Ragged
    edge_index: Ragged
    edges: Ragged | None = None
    state: np.ndarray | None = None
    targets: np.ndarray | None = None
    node_labels: Ragged | None = None

    def __post_init__(self) -> None:
        nodes, edge_index = self.nodes, self.edge_index
        if edge_index.nrows != nodes.nrows:
            raise DimensionError(
                f"edge_index has {edge_index.nrows} graphs, nodes has {nodes.nrows}"
            )
        if edge_index.total_rows == 0 and edge_index.width != 2:
            edge_index = _empty_pairs(edge_index.row_splits)
            object.__setattr__(self, "edge_index", edge_index)
        if edge_index.width != 2:
            raise DimensionError(f"edge_index rows must be pairs, got width {edge_index.width}")
        if edge_index.total_rows and edge_index.dtype != np.int64:
            raise GraphValidationError("edge_index must hold integers")

        counts = nodes.row_lengths()
        if edge_index.total_rows:
            bound = counts[edge_index.value_rowids()][:, None]
            bad = (edge_index.flat_values < 0) | (edge_index.flat_values >= bound)
            if np.any(bad):
                k = int(np.argmax(bad.any(axis=1)))
                b = int(edge_index.value_rowids()[k])
                value = int(edge_index.flat_values[k][bad[k]][0])
                raise GraphValidationError(
                    f"graph {b}: edge index {value} outside [0, {counts[b]})", detail=str(b)
                )

        if self.edges is not None and not np.array_equal(
            self.edges.row_splits, edge_index.row_splits
        ):
            raise GraphValidationError("edges and edge_index must share row_splits")
        if self.state is not None:
            state = np.asarray(self.state, dtype=np.float64)
            if state.ndim != 2 or state.shape[0] != nodes.nrows:
                raise DimensionError(
                    f"state must be ({nodes.nrows}, F_u), got {state.shape}", detail="state"
                )
            object.__setattr__(self, "state", _frozen(state))
        if self.targets is not None:
            targets = np.asarray(self.targets)
            if targets.shape[0] != nodes.nrows or targets.ndim not in (1, 2):
                raise DimensionError(
                    f"targets must have {nodes.nrows} rows, got {targets.shape}",
                    detail="targets",
                )
            object.__setattr__(self, "targets", _frozen(targets))
        if self.node_labels is not None and (
            not np.array_equal(self.node_labels.row_splits, nodes.row_splits)
            or self.node_labels.width != 1
        ):
            raise GraphValidationError("node_labels must be one column aligned with nodes")

    @classmethod
    def from_graphs(
        cls,
        node_features: Sequence[Any],
        edge_indices: Sequence[Any],
        edge_features: Sequence[Any] | None = None,
        states: Sequence[Any] | None = None,
        targets: Any = None,
        node_labels: Sequence[Any] | None = None,
    ) -> GraphBatch:
        """Assemble a batch from per-graph arrays."""
        nodes = ragged_from_rows(node_features, dtype=np.float64)
        edge_index = ragged_from_rows(
            [np.asarray(e, dtype=np.int64).reshape(-1, 2) for e in edge_indices],
            width=2,
            dtype=np.int64,
        )
        edges = None
        if edge_features is not None:
            edges = ragged_from_rows(edge_features, dtype=np.float64)
        state = None if states is None else np.asarray(states, dtype=np.float64).reshape(
            len(states), -1
        )
        labels = None
        if node_labels is not None:
            labels = ragged_from_rows(
                [np.asarray(lab, dtype=np.int64).reshape(-1, 1) for lab in node_labels],
                width=1,
                dtype=np.int64,
            )
        return cls(
            nodes=nodes,
            edge_index=edge_index,
            edges=edges,
            state=state,
            targets=None if targets is None else np.asarray(targets),
            node_labels=labels,
        )

    @property
    def num_graphs(self) -> int:
        return self.nodes.nrows

    def node_counts(self) -> np.ndarray:
        return self.nodes.row_lengths()

    def edge_counts(self) -> np.ndarray:
        return self.edge_index.row_lengths()

    def graph(self, b: int) -> GraphBatch:
        """Single-graph batch holding graph ``b``."""
        return GraphBatch.from_graphs(
            [self.nodes.row(b)],
            [self.edge_index.row(b)],
            edge_features=None if self.edges is None else [self.edges.row(b)],
            states=None if self.state is None else [self.state[b]],
            targets=None if self.targets is None else self.targets[b : b + 1],
            node_labels=None if self.node_labels is None else [self.node_labels.row(b)],
        )

    def equals(self, other: object) -> bool:
        if not isinstance(other, GraphBatch):
            return False

        def same(a: Any, b: Any) -> bool:
            if a is None or b is None:
                return a is None and b is None
            if isinstance(a, Ragged):
                return a.equals(b)
            return a.shape == b.shape and a.dtype == b.dtype and np.array_equal(a, b)

        return all(
            same(getattr(self, name), getattr(other, name))
            for name in ("nodes", "edge_index", "edges", "state", "targets", "node_labels")
        )


@dataclass(frozen=True, eq=False)
class DisjointBatch:
    """All graphs of a batch joined into one graph without cross edges.

    Node and edge rows are laid out graph by graph; ``node_graph_id`` and
    ``edge_graph_id`` record which graph each row came from.
    """

    node_matrix: np.ndarray
    edge_index_global: np.ndarray
    node_graph_id: np.ndarray
    edge_graph_id: np.ndarray
    num_graphs: int
    edge_matrix: np.ndarray | None = None
    state: np.ndarray | None = None
    targets: np.ndarray | None = None
    node_labels: np.ndarray | None = None

    def __post_init__(self) -> None:
        nodes = np.asarray(self.node_matrix, dtype=np.float64)
        pairs = np.asarray(self.edge_index_global)
        if pairs.size == 0:
            pairs = np.zeros((0, 2), dtype=np.int64)
        node_ids = np.asarray(self.node_graph_id, dtype=np.int64).reshape(-1)
        edge_ids = np.asarray(self.edge_graph_id, dtype=np.int64).reshape(-1)
        if nodes.ndim != 2 or pairs.ndim != 2 or pairs.shape[1] != 2:
            raise DimensionError(
                f"node_matrix {nodes.shape} / edge_index_global {pairs.shape} malformed"
            )
        if pairs.size and not np.issubdtype(pairs.dtype, np.integer):
            raise GraphValidationError("edge_index_global must hold integers")
        pairs = pairs.astype(np.int64)
        if node_ids.shape[0] != nodes.shape[0] or edge_ids.shape[0] != pairs.shape[0]:
            raise DimensionError("graph ids must have one entry per node / edge row")
        for name, ids in (("node_graph_id", node_ids), ("edge_graph_id", edge_ids)):
            if ids.size and (ids.min() < 0 or ids.max() >= self.num_graphs):
                raise GraphValidationError(
                    f"{name} outside [0, {self.num_graphs})", detail=name
                )
            if np.any(np.diff(ids) < 0):
                raise GraphValidationError(f"{name} is not blockwise (non-decreasing)", name)
        if pairs.size:
            if pairs.min() < 0 or pairs.max() >= nodes.shape[0]:
                raise GraphValidationError(
                    f"edge_index_global outside [0, {nodes.shape[0]})"
                )
            if np.any(node_ids[pairs] != edge_ids[:, None]):
                k = int(np.argmax(np.any(node_ids[pairs] != edge_ids[:, None], axis=1)))
                raise GraphValidationError(
                    f"edge {k} connects nodes outside graph {edge_ids[k]}", detail=str(k)
                )
        object.__setattr__(self, "node_matrix", _frozen(nodes))
        object.__setattr__(self, "edge_index_global", _frozen(pairs))
        object.__setattr__(self, "node_graph_id", _frozen(node_ids))
        object.__setattr__(self, "edge_graph_id", _frozen(edge_ids))
        if self.edge_matrix is not None:
            edges = np.asarray(self.edge_matrix, dtype=np.float64)
            if edges.ndim != 2 or edges.shape[0] != pairs.shape[0]:
                raise DimensionError(
                    f"edge_matrix must have {pairs.shape[0]} rows, got {edges.shape}"
                )
            object.__setattr__(self, "edge_matrix", _frozen(edges))
        if self.state is not None:
            state = np.asarray(self.state, dtype=np.float64)
            if state.ndim != 2 or state.shape[0] != self.num_graphs:
                raise DimensionError(f"state must be ({self.num_graphs}, F_u)")
            object.__setattr__(self, "state", _frozen(state))
        if self.targets is not None:
            object.__setattr__(self, "targets", _frozen(np.asarray(self.targets)))
        if self.node_labels is not None:
            labels = np.asarray(self.node_labels, dtype=np.int64).reshape(-1)
            if labels.shape[0] != nodes.shape[0]:
                raise DimensionError("node_labels must have one entry per node")
            object.__setattr__(self, "node_labels", _frozen(labels))

    @property
    def num_nodes(self) -> int:
        return int(self.node_matrix.shape[0])

    @property
    def num_edges(self) -> int:
        return int(self.edge_index_global.shape[0])

    @property
    def receivers(self) -> np.ndarray:
        return self.edge_index_global[:, 0]

    @property
    def senders(self) -> np.ndarray:
        return self.edge_index_global[:, 1]

    def node_splits(self) -> np.ndarray:
        counts = np.bincount(self.node_graph_id, minlength=self.num_graphs)
        return np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    def edge_splits(self) -> np.ndarray:
        counts = np.bincount(self.edge_graph_id, minlength=self.num_graphs)
        return np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)


def to_disjoint(batch: GraphBatch) -> DisjointBatch:
    """Offset every graph's local edge indices by the node count of the graphs before it."""
    offsets = batch.nodes.row_splits[:-1]
    edge_graph_id = batch.edge_index.value_rowids()
    edge_index_global = batch.edge_index.flat_values + offsets[edge_graph_id][:, None]
    return DisjointBatch(
        node_matrix=batch.nodes.flat_values,
        edge_index_global=edge_index_global,
        node_graph_id=batch.nodes.value_rowids(),
        edge_graph_id=edge_graph_id,
        num_graphs=batch.num_graphs,
        edge_matrix=None if batch.edges is None else batch.edges.flat_values,
        state=batch.state,
        targets=batch.targets,
        node_labels=None if batch.node_labels is None else batch.node_labels.flat_values[:, 0],
    )


def from_disjoint(d: DisjointBatch) -> GraphBatch:
    """Split a disjoint batch back into its ragged form (exact inverse of `to_disjoint`)."""
    node_splits = d.node_splits()
    edge_splits = d.edge_splits()
    local = d.edge_index_global - node_splits[:-1][d.edge_graph_id][:, None]
    return GraphBatch(
        nodes=Ragged(d.node_matrix, node_splits),
        edge_index=Ragged(local, edge_splits),
        edges=None if d.edge_matrix is None else Ragged(d.edge_matrix, edge_splits),
        state=d.state,
        targets=d.targets,
        node_labels=None
        if d.node_labels is None
        else Ragged(d.node_labels.reshape(-1, 1), node_splits),
    )
