"""Convert a TU-format graph classification archive (e.g. MUTAG) to raggednn JSONL.

Reads ``<NAME>_A.txt``, ``<NAME>_graph_indicator.txt``, ``<NAME>_graph_labels.txt``
and, when present, ``<NAME>_node_labels.txt`` and ``<NAME>_edge_labels.txt``.
Node and edge labels become one-hot features; graph labels are mapped to
class ids in sorted order (MUTAG's -1 / 1 become 0 / 1).

    python scripts/tu_to_jsonl.py --dir MUTAG --name MUTAG --out data/mutag.jsonl
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np
import pandas as pd

from raggednn.datasets import GraphRecord, dump_jsonl_dataset
from raggednn.log import get_logger, setup_logging

logger = get_logger(__name__)


def _read_ints(path: Path) -> np.ndarray:
    frame = pd.read_csv(path, header=None, sep=r"\s*,\s*", engine="python")
    return frame.to_numpy(dtype=np.int64)


def _one_hot(labels: np.ndarray) -> np.ndarray:
    values, ids = np.unique(labels, return_inverse=True)
    return np.eye(values.shape[0])[ids]


def convert(directory: Path, name: str, limit: int | None = None) -> list[GraphRecord]:
    edges = _read_ints(directory / f"{name}_A.txt") - 1
    graph_of_node = _read_ints(directory / f"{name}_graph_indicator.txt")[:, 0] - 1
    graph_labels = _read_ints(directory / f"{name}_graph_labels.txt")[:, 0]
    classes = {value: k for k, value in enumerate(sorted(set(graph_labels.tolist())))}

    node_path = directory / f"{name}_node_labels.txt"
    if node_path.exists():
        node_features = _one_hot(_read_ints(node_path)[:, 0])
    else:
        node_features = np.ones((graph_of_node.shape[0], 1))
    edge_path = directory / f"{name}_edge_labels.txt"
    edge_features = _one_hot(_read_ints(edge_path)[:, 0]) if edge_path.exists() else None

    first_node = np.searchsorted(graph_of_node, np.arange(graph_labels.shape[0]))
    graph_of_edge = graph_of_node[edges[:, 0]]
    count = graph_labels.shape[0] if limit is None else min(limit, graph_labels.shape[0])

    records = []
    for g in range(count):
        nodes = np.flatnonzero(graph_of_node == g)
        rows = np.flatnonzero(graph_of_edge == g)
        # TU lists (source, target); raggednn stores (receiver, sender)
        local = edges[rows][:, ::-1] - first_node[g]
        records.append(
            GraphRecord(
                id=f"{name.lower()}-{g}",
                node_features=node_features[nodes],
                edge_index=local,
                edge_features=None if edge_features is None else edge_features[rows],
                label=classes[int(graph_labels[g])],
            )
        )
    return records


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dir", required=True, type=Path)
    parser.add_argument("--name", required=True)
    parser.add_argument("--out", required=True, type=Path)
    parser.add_argument("--limit", type=int, default=None, help="keep only the first N graphs")
    args = parser.parse_args()
    setup_logging()

    records = convert(args.dir, args.name, args.limit)
    dump_jsonl_dataset(records, args.out)
    logger.info("dataset_written", path=str(args.out), graphs=len(records))


if __name__ == "__main__":
    main()
