"""Graph convolution with the renormalized adjacency ``D^-1/2 (A + I) D^-1/2``."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .. import autodiff as ad
from ..adjacency import AdjacencyCsr, adjacency_from_edges
from ..autodiff import Node
from ..batch import DisjointBatch
from ..exceptions import DimensionError, GraphValidationError
from .base import DenseLayer


def gcn_normalize(a: AdjacencyCsr, num_nodes: int | None = None) -> AdjacencyCsr:
    """Add self-loops and scale entry ``(i, j)`` by ``1 / sqrt(d_i d_j)``.

    Degrees are counted after the self-loops, so an isolated node ends up
    with a diagonal entry of 1.

    Raises:
        GraphValidationError: if the input already has a self-loop.
    """
    n = a.num_nodes if num_nodes is None else num_nodes
    if n != a.num_nodes:
        raise DimensionError(f"adjacency has {a.num_nodes} nodes, expected {n}")
    loops = a.row_ids() == a.col_idx
    if np.any(loops):
        node = int(a.col_idx[np.argmax(loops)])
        raise GraphValidationError(f"node {node} already has a self-loop", detail=str(node))

    a_tilde = a.to_scipy() + sp.eye_array(n, format="csr")
    degree = np.asarray(a_tilde.sum(axis=1)).reshape(-1)
    d_inv_sqrt = sp.diags_array(1.0 / np.sqrt(degree))
    return AdjacencyCsr.from_scipy(d_inv_sqrt @ a_tilde @ d_inv_sqrt)


def gcn_adjacency(d: DisjointBatch) -> AdjacencyCsr:
    """Normalized block-diagonal adjacency of a disjoint batch."""
    return gcn_normalize(adjacency_from_edges(d), d.num_nodes)


def gcn_conv(h: Node, a_norm: AdjacencyCsr, layer: DenseLayer) -> Node:
    """``activation(A_hat h W + b)`` via gather and segment-sum over the stored entries."""
    if h.shape[0] != a_norm.num_nodes:
        raise DimensionError(f"{h.shape[0]} node rows for a {a_norm.num_nodes}-node adjacency")
    hw = layer.linear(h)
    weights = h.tape.constant(a_norm.values.reshape(-1, 1))
    neighbours = ad.scale_rows(ad.gather_rows(hw, a_norm.col_idx), weights)
    return layer.finish(ad.segment_sum(neighbours, a_norm.row_ids(), a_norm.num_nodes))
