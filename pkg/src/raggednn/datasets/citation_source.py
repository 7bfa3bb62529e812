"""Citation-network TSV datasets (Cora-style) read with pandas."""

from __future__ import annotations

import re
from pathlib import Path

import numpy as np
import pandas as pd

from ..exceptions import ConfigError, DataFormatError
from ..schemas import DatasetSpec
from .base import DatasetSource
from .records import GraphRecord, infer_dataset_spec


def _read_tsv(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise ConfigError(f"path does not exist: {path}", detail=str(path))
    try:
        return pd.read_csv(
            path, sep="\t", header=None, dtype=str, keep_default_na=False, encoding="utf-8"
        )
    except pd.errors.EmptyDataError as e:
        raise ConfigError(f"{path}: no rows", detail=str(path)) from e
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise DataFormatError(int(match.group(1)) if match else 1, f"{path}: {e}") from e


def load_citation_dataset(
    nodes_path: str | Path, edges_path: str | Path
) -> tuple[DatasetSpec, list[GraphRecord]]:
    """Load one large citation graph.

    Node ids are remapped to ``[0, N)`` in file order, labels to integers by
    sorted label string, and every citation is stored in both directions.
    Self-citations are dropped since graph convolution adds its own loops.

    Raises:
        DataFormatError: on duplicate node ids, non-numeric features or a
            citation naming an unknown node (line numbers are per file).
    """
    nodes = _read_tsv(Path(nodes_path))
    if nodes.shape[1] < 3:
        raise DataFormatError(1, "node rows need an id, features and a label")
    ids = nodes.iloc[:, 0]
    duplicated = ids.duplicated()
    if duplicated.any():
        row = int(np.argmax(duplicated.to_numpy()))
        raise DataFormatError(row + 1, f"duplicate node id {ids.iloc[row]}")
    index = {node_id: k for k, node_id in enumerate(ids)}

    try:
        features = nodes.iloc[:, 1:-1].astype(np.float64).to_numpy()
    except ValueError as e:
        bad = nodes.iloc[:, 1:-1].apply(pd.to_numeric, errors="coerce").isna().any(axis=1)
        row = int(np.argmax(bad.to_numpy()))
        raise DataFormatError(row + 1, f"non-numeric feature for node {ids.iloc[row]}") from e
    label_strings = nodes.iloc[:, -1]
    label_names = sorted(label_strings.unique())
    label_map = {name: k for k, name in enumerate(label_names)}
    node_labels = label_strings.map(label_map).to_numpy(dtype=np.int64)

    edges = _read_tsv(Path(edges_path))
    if edges.shape[1] != 2:
        raise DataFormatError(1, f"edge rows need 2 columns, got {edges.shape[1]}")
    pairs = []
    for row, (src, dst) in enumerate(edges.itertuples(index=False, name=None), start=1):
        for endpoint in (src, dst):
            if endpoint not in index:
                raise DataFormatError(row, f"edge endpoint {endpoint} is not a known node")
        i, j = index[src], index[dst]
        if i != j:
            pairs.append((i, j))
            pairs.append((j, i))
    edge_index = (
        np.unique(np.asarray(pairs, dtype=np.int64), axis=0)
        if pairs
        else np.zeros((0, 2), dtype=np.int64)
    )

    record = GraphRecord(
        id=Path(nodes_path).stem,
        node_features=features,
        edge_index=edge_index,
        node_labels=node_labels,
    )
    return infer_dataset_spec([record], label_names=label_names), [record]


class CitationSource(DatasetSource):
    """A node TSV plus a citation TSV describing one graph."""

    path_keys = ("nodes", "edges")

    def load(self) -> tuple[DatasetSpec, list[GraphRecord]]:
        return load_citation_dataset(self.config["nodes"], self.config["edges"])
