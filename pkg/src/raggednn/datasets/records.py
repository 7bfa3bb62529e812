"""Per-graph records and their conversion to and from graph batches."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from ..batch import GraphBatch
from ..exceptions import ConfigError, DataFormatError, DimensionError, GraphValidationError
from ..ragged import _frozen
from ..schemas import DatasetSpec

SUPERVISION_FIELDS = ("targets", "label", "node_labels")


@dataclass(frozen=True, eq=False)
class GraphRecord:
    """One graph with exactly one kind of supervision.

    ``edge_index`` rows are ``(receiver, sender)``. ``node_labels`` uses -1
    for unlabeled nodes.
    """

    id: str
    node_features: np.ndarray
    edge_index: np.ndarray
    edge_features: np.ndarray | None = None
    targets: np.ndarray | None = None
    label: int | None = None
    node_labels: np.ndarray | None = None
    state: np.ndarray | None = None
    positions: np.ndarray | None = None

    def __post_init__(self) -> None:
        nodes = np.asarray(self.node_features, dtype=np.float64)
        if nodes.size == 0 and nodes.ndim < 2:
            nodes = nodes.reshape(0, 0)
        if nodes.ndim != 2:
            raise DimensionError(f"node features must be a matrix, got shape {nodes.shape}")
        n = nodes.shape[0]
        edges = np.asarray(self.edge_index, dtype=np.int64).reshape(-1, 2)
        if edges.size:
            bad = (edges < 0) | (edges >= n)
            if np.any(bad):
                value = int(edges[bad][0])
                raise GraphValidationError(f"edge index {value} ≥ {n} nodes", detail=str(value))
        given = [name for name in SUPERVISION_FIELDS if getattr(self, name) is not None]
        if len(given) != 1:
            raise GraphValidationError(
                f"graph {self.id}: exactly one of targets / label / node_labels is required"
            )
        object.__setattr__(self, "node_features", _frozen(nodes))
        object.__setattr__(self, "edge_index", _frozen(edges))
        if self.edge_features is not None:
            feats = np.asarray(self.edge_features, dtype=np.float64)
            if edges.shape[0] == 0 and feats.size == 0:
                feats = feats.reshape(0, feats.shape[-1] if feats.ndim == 2 else 0)
            if feats.ndim != 2 or feats.shape[0] != edges.shape[0]:
                raise DimensionError(
                    f"graph {self.id}: {feats.shape} edge features for {edges.shape[0]} edges"
                )
            object.__setattr__(self, "edge_features", _frozen(feats))
        if self.targets is not None:
            object.__setattr__(
                self, "targets", _frozen(np.asarray(self.targets, dtype=np.float64).reshape(-1))
            )
        if self.label is not None:
            object.__setattr__(self, "label", int(self.label))
        if self.node_labels is not None:
            labels = np.asarray(self.node_labels, dtype=np.int64).reshape(-1)
            if labels.shape[0] != n:
                raise DimensionError(f"graph {self.id}: {labels.shape[0]} labels for {n} nodes")
            object.__setattr__(self, "node_labels", _frozen(labels))
        if self.state is not None:
            object.__setattr__(
                self, "state", _frozen(np.asarray(self.state, dtype=np.float64).reshape(-1))
            )
        if self.positions is not None:
            pos = np.asarray(self.positions, dtype=np.float64)
            if pos.shape != (n, 3):
                raise DimensionError(
                    f"graph {self.id}: positions must be ({n}, 3), got {pos.shape}"
                )
            object.__setattr__(self, "positions", _frozen(pos))

    @property
    def num_nodes(self) -> int:
        return int(self.node_features.shape[0])

    @property
    def num_edges(self) -> int:
        return int(self.edge_index.shape[0])

    @property
    def task(self) -> str:
        if self.targets is not None:
            return "graph_regression"
        if self.label is not None:
            return "graph_classification"
        return "node_classification"

    def replace(self, **changes: Any) -> GraphRecord:
        return dataclasses.replace(self, **changes)


def infer_dataset_spec(
    records: Sequence[GraphRecord],
    target_names: Sequence[str] | None = None,
    label_names: Sequence[str] | None = None,
) -> DatasetSpec:
    """Derive the shared DatasetSpec and check every record agrees with it.

    Raises:
        DataFormatError: naming the 1-based position of the first disagreeing record.
    """
    if not records:
        raise ConfigError("no graphs", detail="records")
    first = records[0]
    task = first.task
    node_width = next((r.node_features.shape[1] for r in records if r.num_nodes), 0)
    edge_width = None
    for rec in records:
        if rec.edge_features is not None and rec.num_edges:
            edge_width = rec.edge_features.shape[1]
            break
    num_targets = None if first.targets is None else first.targets.shape[0]
    max_class = -1

    for pos, rec in enumerate(records, start=1):
        if rec.task != task:
            raise DataFormatError(pos, f"graph {rec.id} is {rec.task}, expected {task}")
        if rec.node_features.shape[1] != node_width and rec.num_nodes:
            raise DataFormatError(
                pos, f"graph {rec.id} has node width {rec.node_features.shape[1]}, "
                f"expected {node_width}"
            )
        if rec.num_edges and edge_width is not None:
            if rec.edge_features is None or rec.edge_features.shape[1] != edge_width:
                raise DataFormatError(
                    pos, f"graph {rec.id} lacks edge features of width {edge_width}"
                )
        if rec.targets is not None and rec.targets.shape[0] != num_targets:
            raise DataFormatError(
                pos, f"graph {rec.id} has {rec.targets.shape[0]} targets, expected {num_targets}"
            )
        if rec.label is not None:
            if rec.label < 0:
                raise DataFormatError(pos, f"graph {rec.id} has negative label {rec.label}")
            max_class = max(max_class, rec.label)
        if rec.node_labels is not None and rec.node_labels.size:
            max_class = max(max_class, int(rec.node_labels.max()))

    names = list(target_names) if target_names else []
    if task == "graph_regression":
        if not names:
            names = [f"target_{k}" for k in range(num_targets or 0)]
        elif len(names) != num_targets:
            raise ConfigError(
                f"{len(names)} target names for {num_targets} targets", detail="target_names"
            )
    labels = list(label_names) if label_names else []
    num_classes = None
    if task != "graph_regression":
        num_classes = max(max_class + 1, len(labels))
    state_width = None if first.state is None else int(first.state.shape[0])
    return DatasetSpec(
        task=task,
        target_names=names,
        num_classes=num_classes,
        num_targets=num_targets,
        node_width=node_width,
        edge_width=edge_width,
        state_width=state_width,
        label_names=labels,
    )


def _fill_edge_features(records: Sequence[GraphRecord]) -> list[GraphRecord]:
    """Give edgeless records an empty edge-feature block when others have features."""
    width = next(
        (r.edge_features.shape[1] for r in records if r.edge_features is not None and r.num_edges),
        None,
    )
    if width is None:
        return list(records)
    return [
        r.replace(edge_features=np.zeros((0, width)))
        if r.num_edges == 0 and (r.edge_features is None or r.edge_features.shape[1] != width)
        else r
        for r in records
    ]


def records_to_batch(records: Sequence[GraphRecord]) -> GraphBatch:
    """Pack records into one GraphBatch, carrying their supervision along."""
    if not records:
        raise ConfigError("no graphs", detail="records")
    records = _fill_edge_features(records)
    tasks = {r.task for r in records}
    if len(tasks) != 1:
        raise ConfigError(f"cannot batch mixed tasks {sorted(tasks)}", detail="task")
    task = tasks.pop()

    has_edges = [r.edge_features is not None for r in records]
    if any(has_edges) and not all(has_edges):
        raise DimensionError("either every graph in a batch has edge features or none does")
    has_state = [r.state is not None for r in records]
    if any(has_state) and not all(has_state):
        raise DimensionError("either every graph in a batch has a state or none does")

    targets: Any = None
    if task == "graph_regression":
        targets = np.stack([r.targets for r in records])
    elif task == "graph_classification":
        targets = np.array([r.label for r in records], dtype=np.int64)

    return GraphBatch.from_graphs(
        [r.node_features for r in records],
        [r.edge_index for r in records],
        edge_features=[r.edge_features for r in records] if all(has_edges) else None,
        states=[r.state for r in records] if all(has_state) else None,
        targets=targets,
        node_labels=[r.node_labels for r in records] if task == "node_classification" else None,
    )


def unbatch(batch: GraphBatch, ids: Sequence[str] | None = None) -> list[GraphRecord]:
    """Split a batch back into records (positions are not carried by batches)."""
    records = []
    for b in range(batch.num_graphs):
        supervision: dict[str, Any] = {}
        if batch.node_labels is not None:
            supervision["node_labels"] = batch.node_labels.row(b)[:, 0]
        elif batch.targets is not None and batch.targets.ndim == 2:
            supervision["targets"] = batch.targets[b]
        elif batch.targets is not None:
            supervision["label"] = int(batch.targets[b])
        records.append(
            GraphRecord(
                id=ids[b] if ids is not None else f"g{b}",
                node_features=batch.nodes.row(b),
                edge_index=batch.edge_index.row(b),
                edge_features=None if batch.edges is None else batch.edges.row(b),
                state=None if batch.state is None else batch.state[b],
                **supervision,
            )
        )
    return records


def select_targets(
    records: Sequence[GraphRecord], spec: DatasetSpec, names: Sequence[str]
) -> tuple[list[GraphRecord], DatasetSpec]:
    """Keep only the named regression targets, in the order given."""
    if spec.task != "graph_regression":
        raise ConfigError("target selection needs a regression dataset", detail="target_names")
    missing = [n for n in names if n not in spec.target_names]
    if missing:
        raise ConfigError(
            f"unknown target(s) {missing}; available: {', '.join(spec.target_names)}",
            detail="target_names",
        )
    columns = [spec.target_names.index(n) for n in names]
    selected = [r.replace(targets=r.targets[columns]) for r in records]
    return selected, spec.model_copy(
        update={"target_names": list(names), "num_targets": len(columns)}
    )
