"""Dataset splitting, mini-batch assembly and representation statistics."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Sequence, TypeVar

import numpy as np
import pandas as pd

from ..batch import GraphBatch
from ..exceptions import ConfigError, ContractError
from ..ragged import to_padded
from .records import GraphRecord, records_to_batch

T = TypeVar("T")

REPORT_COLUMNS = [
    "batch",
    "graphs",
    "nodes",
    "edges",
    "padded_node_cells",
    "ragged_node_cells",
    "padded_edge_cells",
    "ragged_edge_cells",
    "overhead",
]


def _check_fractions(fractions: Sequence[float]) -> np.ndarray:
    fr = np.asarray(fractions, dtype=np.float64)
    if fr.shape != (3,) or np.any(fr < 0) or abs(fr.sum() - 1.0) > 1e-9:
        raise ConfigError(
            f"split fractions must be three non-negative numbers summing to 1, got {fractions}",
            detail="split",
        )
    return fr


def _split_sizes(n: int, fr: np.ndarray) -> tuple[int, int]:
    n_train = min(int(np.floor(fr[0] * n + 0.5)), n)
    n_val = min(int(np.floor(fr[1] * n + 0.5)), n - n_train)
    return n_train, n_val


def split_dataset(
    records: Sequence[T], fractions: Sequence[float] = (0.8, 0.1, 0.1), seed: int = 0
) -> tuple[list[T], list[T], list[T]]:
    """Seeded shuffle, then consecutive train / val / test slices (test takes the rest)."""
    fr = _check_fractions(fractions)
    order = np.random.default_rng(seed).permutation(len(records))
    n_train, n_val = _split_sizes(len(records), fr)
    pick = [records[i] for i in order]
    return pick[:n_train], pick[n_train : n_train + n_val], pick[n_train + n_val :]


def split_node_labels(
    record: GraphRecord, fractions: Sequence[float] = (0.1, 0.1, 0.8), seed: int = 0
) -> tuple[GraphRecord, GraphRecord, GraphRecord]:
    """Split the labeled nodes of one graph; outside its split a node reads -1."""
    if record.node_labels is None:
        raise ConfigError(f"graph {record.id} has no node labels", detail="node_labels")
    fr = _check_fractions(fractions)
    labeled = np.flatnonzero(record.node_labels >= 0)
    order = labeled[np.random.default_rng(seed).permutation(labeled.shape[0])]
    n_train, n_val = _split_sizes(labeled.shape[0], fr)
    parts = (order[:n_train], order[n_train : n_train + n_val], order[n_train + n_val :])
    splits = []
    for nodes in parts:
        labels = np.full(record.num_nodes, -1, dtype=np.int64)
        labels[nodes] = record.node_labels[nodes]
        splits.append(record.replace(node_labels=labels))
    return splits[0], splits[1], splits[2]


def batch_graphs(
    records: Sequence[GraphRecord],
    batch_size: int,
    shuffle: bool = False,
    seed: int = 0,
    threads: int = 1,
) -> list[GraphBatch]:
    """Pack consecutive (optionally shuffled) records; the last batch may be short.

    ``threads > 1`` assembles batches in a thread pool; batch order is unchanged.
    """
    if batch_size < 1:
        raise ContractError(f"batch_size must be >= 1, got {batch_size}", detail="batch_size")
    n = len(records)
    order = np.random.default_rng(seed).permutation(n) if shuffle else np.arange(n)
    chunks = [[records[i] for i in order[s : s + batch_size]] for s in range(0, n, batch_size)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(records_to_batch, chunks))
    return [records_to_batch(chunk) for chunk in chunks]


def representation_report(batches: Sequence[GraphBatch]) -> pd.DataFrame:
    """Padded versus ragged storage per batch, plus a ``total`` row.

    Cells count rows (nodes or edges); overhead is padded over ragged node cells.
    """
    rows = []
    for k, batch in enumerate(batches):
        rows.append(
            {
                "batch": str(k),
                "graphs": batch.num_graphs,
                "nodes": batch.nodes.total_rows,
                "edges": batch.edge_index.total_rows,
                "padded_node_cells": int(to_padded(batch.nodes).mask.size),
                "ragged_node_cells": batch.nodes.total_rows,
                "padded_edge_cells": int(to_padded(batch.edge_index).mask.size),
                "ragged_edge_cells": batch.edge_index.total_rows,
            }
        )
    frame = pd.DataFrame(rows, columns=REPORT_COLUMNS[:-1])
    totals = frame.drop(columns="batch").sum().astype(int).to_dict()
    frame.loc[len(frame)] = {"batch": "total", **totals}
    ragged = frame["ragged_node_cells"].where(frame["ragged_node_cells"] > 0)
    frame["overhead"] = (frame["padded_node_cells"] / ragged).fillna(1.0)
    return frame
