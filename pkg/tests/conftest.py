"""Shared test fixtures for raggednn tests."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from raggednn.batch import GraphBatch
from raggednn.datasets import GraphRecord, dump_jsonl_dataset, random_labeled_graphs


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def small_batch() -> GraphBatch:
    """Two graphs of 2 and 3 nodes, each a directed path with both directions stored."""
    return GraphBatch.from_graphs(
        node_features=[
            [[1.0, 0.0], [0.0, 1.0]],
            [[1.0, 1.0], [2.0, 0.0], [0.0, 2.0]],
        ],
        edge_indices=[
            [[0, 1], [1, 0]],
            [[0, 1], [1, 0], [1, 2], [2, 1]],
        ],
        edge_features=[
            [[1.0], [2.0]],
            [[3.0], [4.0], [5.0], [6.0]],
        ],
        targets=[[0.5], [1.5]],
    )


@pytest.fixture
def labeled_graphs() -> list[GraphRecord]:
    return random_labeled_graphs(20, seed=0)


@pytest.fixture
def tmp_jsonl(labeled_graphs: list[GraphRecord], tmp_path: Path) -> Path:
    """MUTAG-sized classification graphs written as JSONL."""
    return dump_jsonl_dataset(labeled_graphs, tmp_path / "graphs.jsonl")


@pytest.fixture
def regression_jsonl(tmp_path: Path) -> Path:
    lines = [
        {
            "id": "a",
            "nodes": [[1.0], [0.0]],
            "edges": [[0, 1], [1, 0]],
            "targets": [0.1, 0.2],
            "target_names": ["homo", "lumo"],
        },
        {
            "id": "b",
            "nodes": [[0.5], [0.5], [1.0]],
            "edges": [[0, 2], [2, 0]],
            "targets": [0.3, 0.4],
            "target_names": ["homo", "lumo"],
        },
    ]
    path = tmp_path / "regression.jsonl"
    path.write_text("\n".join(json.dumps(line) for line in lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def citation_files(tmp_path: Path) -> tuple[Path, Path]:
    """A four-node citation graph in Cora's TSV layout."""
    nodes = tmp_path / "papers.content"
    edges = tmp_path / "papers.cites"
    nodes.write_text(
        "p1\t1\t0\t0\tTheory\n"
        "p2\t0\t1\t0\tNeural\n"
        "p3\t0\t0\t1\tNeural\n"
        "p4\t1\t1\t0\tTheory\n",
        encoding="utf-8",
    )
    edges.write_text("p1\tp2\np2\tp3\np4\tp1\np3\tp3\n", encoding="utf-8")
    return nodes, edges


@pytest.fixture
def mock_env(monkeypatch: pytest.MonkeyPatch) -> None:
    """Set environment variables for test settings."""
    monkeypatch.setenv("RAGGEDNN_SEED", "7")
    monkeypatch.setenv("RAGGEDNN_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("RAGGEDNN_THREADS", "2")
