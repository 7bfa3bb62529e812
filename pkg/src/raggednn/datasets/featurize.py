"""Distance featurization for position-bearing records."""

from __future__ import annotations

import numpy as np
from scipy.spatial.distance import cdist

from ..exceptions import ContractError
from ..layers.schnet import gaussian_basis, gaussian_centers
from ..schemas import BasisSpec
from .records import GraphRecord


def expand_distances(
    record: GraphRecord, cutoff: float, basis: BasisSpec | None = None
) -> GraphRecord:
    """Connect every ordered pair within ``cutoff`` and featurize its distance.

    Edges come out receiver-major: all senders of node 0 first, in increasing
    index order. The edge set is symmetric.
    """
    if cutoff <= 0:
        raise ContractError(f"cutoff must be > 0, got {cutoff}", detail="cutoff")
    if record.positions is None:
        raise ContractError(f"graph {record.id} has no positions", detail="positions")
    basis = basis or BasisSpec()
    distances = cdist(record.positions, record.positions)
    within = (distances <= cutoff) & ~np.eye(record.num_nodes, dtype=bool)
    receivers, senders = np.nonzero(within)
    features = gaussian_basis(
        distances[receivers, senders], gaussian_centers(basis.num, basis.r_max), basis.gamma
    )
    return record.replace(
        edge_index=np.stack([receivers, senders], axis=1),
        edge_features=features,
    )
