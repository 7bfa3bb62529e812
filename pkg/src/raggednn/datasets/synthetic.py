"""Seeded synthetic datasets for tests and acceptance runs without downloads."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import pdist

from .records import GraphRecord

MOLECULE_TARGETS = ["homo", "lumo", "gap"]


def _undirected_pairs(upper: np.ndarray) -> np.ndarray:
    """Both directions of every ``True`` entry of an upper-triangular mask, receiver-major."""
    sym = upper | upper.T
    receivers, senders = np.nonzero(sym)
    return np.stack([receivers, senders], axis=1).astype(np.int64)


def stochastic_block_record(
    num_nodes: int = 200,
    p_in: float = 0.1,
    p_out: float = 0.01,
    feature_dim: int = 8,
    noise: float = 1.0,
    seed: int = 0,
) -> GraphRecord:
    """Two-block stochastic graph with noisy block-indicator features.

    The first half of the feature columns indicates block 0, the second half
    block 1; gaussian noise of scale ``noise`` is added everywhere.
    """
    rng = np.random.default_rng(seed)
    blocks = (np.arange(num_nodes) >= num_nodes // 2).astype(np.int64)
    same = blocks[:, None] == blocks[None, :]
    probs = np.where(same, p_in, p_out)
    upper = np.triu(rng.random((num_nodes, num_nodes)) < probs, k=1)

    half = feature_dim // 2
    features = rng.normal(scale=noise, size=(num_nodes, feature_dim))
    features[blocks == 0, :half] += 1.0
    features[blocks == 1, half:] += 1.0
    return GraphRecord(
        id=f"sbm-{seed}",
        node_features=features,
        edge_index=_undirected_pairs(upper),
        node_labels=blocks,
    )


def random_molecule_records(
    count: int = 100,
    seed: int = 0,
    min_atoms: int = 3,
    max_atoms: int = 9,
    atom_types: int = 4,
) -> list[GraphRecord]:
    """Small 3D point clouds with homo / lumo / gap-like targets derived from geometry.

    Edges are left empty; `expand_distances` builds them from the positions.
    """
    rng = np.random.default_rng(seed)
    type_energy = np.linspace(-0.6, 0.6, atom_types)
    records = []
    for k in range(count):
        n = int(rng.integers(min_atoms, max_atoms + 1))
        types = rng.integers(0, atom_types, size=n)
        positions = rng.uniform(0.0, 1.2 * np.cbrt(n), size=(n, 3))
        distances = pdist(positions)
        contact = float(np.exp(-distances).sum()) / n
        composition = float(type_energy[types].mean())
        homo = -6.0 + 0.8 * composition - 0.5 * contact
        lumo = 1.0 + 0.4 * composition + 0.3 * float(distances.mean() if n > 1 else 0.0)
        records.append(
            GraphRecord(
                id=f"mol-{k}",
                node_features=np.eye(atom_types)[types],
                edge_index=np.zeros((0, 2), dtype=np.int64),
                positions=positions,
                targets=[homo, lumo, lumo - homo],
            )
        )
    return records


def random_labeled_graphs(
    count: int = 20,
    seed: int = 0,
    min_nodes: int = 10,
    max_nodes: int = 28,
    node_types: int = 7,
    edge_types: int = 4,
) -> list[GraphRecord]:
    """MUTAG-sized classification graphs: a random tree plus a few ring closures.

    The label is 1 when type-0 nodes outnumber type-1 nodes.
    """
    rng = np.random.default_rng(seed)
    records = []
    for k in range(count):
        n = int(rng.integers(min_nodes, max_nodes + 1))
        types = rng.integers(0, node_types, size=n)
        upper = np.zeros((n, n), dtype=bool)
        for child in range(1, n):
            parent = int(rng.integers(0, child))
            upper[parent, child] = True
        for _ in range(int(rng.integers(0, 3))):
            a, b = sorted(rng.choice(n, size=2, replace=False).tolist())
            upper[a, b] = True
        bond = np.triu(rng.integers(0, edge_types, size=(n, n)), k=1)
        bond = bond + bond.T
        edge_index = _undirected_pairs(upper)
        label = int((types == 0).sum() > (types == 1).sum())
        records.append(
            GraphRecord(
                id=f"graph-{k}",
                node_features=np.eye(node_types)[types],
                edge_index=edge_index,
                edge_features=np.eye(edge_types)[bond[edge_index[:, 0], edge_index[:, 1]]],
                label=label,
            )
        )
    return records
