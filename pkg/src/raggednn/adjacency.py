"""CSR adjacency built from disjoint edge lists."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.sparse as sp

from .batch import DisjointBatch
from .exceptions import DimensionError, GraphValidationError
from .ragged import _frozen


@dataclass(frozen=True, eq=False)
class AdjacencyCsr:
    """Square CSR matrix: row = receiver, column = sender."""

    row_ptr: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self) -> None:
        row_ptr = np.asarray(self.row_ptr, dtype=np.int64)
        col_idx = np.asarray(self.col_idx, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        n = row_ptr.shape[0] - 1
        if n < 0 or row_ptr[0] != 0 or np.any(np.diff(row_ptr) < 0):
            raise GraphValidationError("row_ptr must start at 0 and be non-decreasing")
        if row_ptr[-1] != col_idx.shape[0] or values.shape != col_idx.shape:
            raise DimensionError(
                f"row_ptr ends at {row_ptr[-1]}, col_idx has {col_idx.shape[0]}, "
                f"values has {values.shape[0]} entries"
            )
        if col_idx.size and (col_idx.min() < 0 or col_idx.max() >= n):
            raise GraphValidationError(f"col_idx outside [0, {n})")
        rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(row_ptr))
        same_row = rows[1:] == rows[:-1]
        if np.any(col_idx[1:][same_row] <= col_idx[:-1][same_row]):
            raise GraphValidationError("col_idx must be strictly increasing within each row")
        object.__setattr__(self, "row_ptr", _frozen(row_ptr))
        object.__setattr__(self, "col_idx", _frozen(col_idx))
        object.__setattr__(self, "values", _frozen(values))

    @classmethod
    def from_scipy(cls, matrix: Any) -> AdjacencyCsr:
        csr = sp.csr_array(matrix)
        csr.sort_indices()
        return cls(csr.indptr, csr.indices, csr.data)

    @property
    def num_nodes(self) -> int:
        return int(self.row_ptr.shape[0] - 1)

    @property
    def nnz(self) -> int:
        return int(self.col_idx.shape[0])

    def row_ids(self) -> np.ndarray:
        """Row (receiver) index of every stored entry."""
        return np.repeat(np.arange(self.num_nodes, dtype=np.int64), np.diff(self.row_ptr))

    def to_scipy(self) -> sp.csr_array:
        n = self.num_nodes
        return sp.csr_array(
            (self.values.copy(), self.col_idx.copy(), self.row_ptr.copy()), shape=(n, n)
        )

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.num_nodes, self.num_nodes), dtype=np.float64)
        dense[self.row_ids(), self.col_idx] = self.values
        return dense


def adjacency_from_edges(d: DisjointBatch, edge_values: Any = None) -> AdjacencyCsr:
    """Assemble ``A[i, j] = value`` for every edge ``(receiver i, sender j)``.

    The result is block-diagonal since disjoint edges never cross graphs.

    Raises:
        GraphValidationError: on a duplicated ``(i, j)`` pair.
    """
    n = d.num_nodes
    receivers, senders = d.receivers, d.senders
    if edge_values is None:
        values = np.ones(d.num_edges, dtype=np.float64)
    else:
        values = np.asarray(edge_values, dtype=np.float64).reshape(-1)
        if values.shape[0] != d.num_edges:
            raise DimensionError(f"{values.shape[0]} edge values for {d.num_edges} edges")

    keys = receivers * max(n, 1) + senders
    unique, counts = np.unique(keys, return_counts=True)
    if np.any(counts > 1):
        dup = int(unique[np.argmax(counts > 1)])
        raise GraphValidationError(
            f"duplicate edge ({dup // n}, {dup % n})", detail=f"{dup // n},{dup % n}"
        )

    if n == 0:
        return AdjacencyCsr(np.zeros(1, dtype=np.int64), [], [])
    coo = sp.coo_array((values, (receivers, senders)), shape=(n, n))
    return AdjacencyCsr.from_scipy(coo.tocsr())
