"""Radial basis expansion and continuous-filter convolution."""

from __future__ import annotations

from typing import Any, Callable

import numpy as np

from .. import autodiff as ad
from ..autodiff import Node
from ..batch import DisjointBatch
from ..exceptions import ContractError, DimensionError


def gaussian_centers(num: int = 20, r_max: float = 4.0) -> np.ndarray:
    """``num`` centers spaced uniformly on ``[0, r_max]``."""
    return np.linspace(0.0, r_max, num)


def gaussian_basis(distances: Any, centers: Any, gamma: float) -> np.ndarray:
    """``out[n, k] = exp(-gamma * (d_n - mu_k)^2)``."""
    if gamma <= 0:
        raise ContractError(f"gamma must be > 0, got {gamma}", detail="gamma")
    d = np.asarray(distances, dtype=np.float64).reshape(-1, 1)
    mu = np.asarray(centers, dtype=np.float64).reshape(1, -1)
    return np.exp(-gamma * (d - mu) ** 2)


def cfconv(
    x: Node,
    d: DisjointBatch,
    edge_feats: Node,
    filter_fn: Callable[[Node], Node],
    in_fn: Callable[[Node], Node] | None = None,
) -> Node:
    """``sum over j of in_fn(x)_j * W(e_ij)`` per receiver, before any residual."""
    x_in = x if in_fn is None else in_fn(x)
    filters = filter_fn(edge_feats)
    x_j = ad.gather_rows(x_in, d.senders)
    if filters.shape != x_j.shape:
        raise DimensionError(
            f"filter width {filters.shape[1]} does not match feature width {x_j.shape[1]}",
            detail="filter",
        )
    return ad.segment_sum(x_j * filters, d.receivers, d.num_nodes)


def schnet_interaction(
    x: Node,
    d: DisjointBatch,
    edge_feats: Node,
    filter_fn: Callable[[Node], Node],
    in_fn: Callable[[Node], Node] | None = None,
    out_fn: Callable[[Node], Node] | None = None,
) -> Node:
    """Residual update ``x + out_fn(cfconv(x))``; widths must be preserved."""
    v = cfconv(x, d, edge_feats, filter_fn, in_fn)
    if out_fn is not None:
        v = out_fn(v)
    if v.shape != x.shape:
        raise DimensionError(
            f"interaction output {v.shape} does not match residual input {x.shape}",
            detail="residual",
        )
    return x + v
