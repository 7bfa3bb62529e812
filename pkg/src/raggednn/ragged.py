"""Ragged and padded batch containers.

A `Ragged` stores a batch of variable-length row blocks as one flat value
buffer plus row-partition offsets (`row_splits`). Every graph batch in the
library is built from these.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from .exceptions import DimensionError, GraphValidationError


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, copy=True)
    out.flags.writeable = False
    return out


def _canonical_dtype(array: np.ndarray) -> np.dtype:
    if np.issubdtype(array.dtype, np.integer):
        return np.dtype(np.int64)
    return np.dtype(np.float64)


@dataclass(frozen=True, eq=False)
class Ragged:
    """Batch of B row blocks with a uniform inner width F.

    Integer buffers are stored as int64, everything else as float64. Both
    arrays are read-only after construction.
    """

    flat_values: np.ndarray
    row_splits: np.ndarray

    def __post_init__(self) -> None:
        flat = np.asarray(self.flat_values)
        if flat.ndim != 2:
            raise DimensionError(
                f"flat_values must be a matrix, got shape {flat.shape}", detail="flat_values"
            )
        splits = np.asarray(self.row_splits)
        if splits.ndim != 1 or splits.size == 0:
            raise GraphValidationError("row_splits must be a non-empty vector")
        if splits.size > 1 and not np.issubdtype(splits.dtype, np.integer):
            raise GraphValidationError("row_splits must be integers")
        splits = splits.astype(np.int64)
        if splits[0] != 0:
            raise GraphValidationError(f"row_splits[0] must be 0, got {splits[0]}")
        if np.any(np.diff(splits) < 0):
            raise GraphValidationError("row_splits must be non-decreasing")
        if splits[-1] != flat.shape[0]:
            raise GraphValidationError(
                f"row_splits ends at {splits[-1]} but there are {flat.shape[0]} rows"
            )
        object.__setattr__(self, "flat_values", _frozen(flat.astype(_canonical_dtype(flat))))
        object.__setattr__(self, "row_splits", _frozen(splits))

    @classmethod
    def from_row_lengths(cls, flat_values: Any, row_lengths: Any) -> Ragged:
        lengths = np.asarray(row_lengths, dtype=np.int64)
        splits = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
        return cls(np.asarray(flat_values), splits)

    @property
    def nrows(self) -> int:
        return int(self.row_splits.size - 1)

    @property
    def width(self) -> int:
        return int(self.flat_values.shape[1])

    @property
    def total_rows(self) -> int:
        return int(self.flat_values.shape[0])

    @property
    def dtype(self) -> np.dtype:
        return self.flat_values.dtype

    def row_lengths(self) -> np.ndarray:
        return np.diff(self.row_splits)

    def value_rowids(self) -> np.ndarray:
        """Batch index of every flat row."""
        return np.repeat(np.arange(self.nrows, dtype=np.int64), self.row_lengths())

    def row(self, b: int) -> np.ndarray:
        return self.flat_values[self.row_splits[b] : self.row_splits[b + 1]]

    def rows(self) -> list[np.ndarray]:
        return [self.row(b) for b in range(self.nrows)]

    def with_values(self, flat_values: Any) -> Ragged:
        """Same partition, new values (row count must match)."""
        return Ragged(np.asarray(flat_values), self.row_splits)

    def equals(self, other: object) -> bool:
        """Exact equality: dtype, partition and values."""
        if not isinstance(other, Ragged):
            return False
        return (
            self.dtype == other.dtype
            and np.array_equal(self.row_splits, other.row_splits)
            and self.flat_values.shape == other.flat_values.shape
            and np.array_equal(self.flat_values, other.flat_values)
        )

    def __repr__(self) -> str:
        return (
            f"Ragged(nrows={self.nrows}, width={self.width}, total_rows={self.total_rows}, "
            f"dtype={self.dtype})"
        )


def ragged_from_rows(
    rows: Sequence[Any], width: int | None = None, dtype: Any = None
) -> Ragged:
    """Stack per-entry matrices into a Ragged.

    Entries may be empty (``[]`` or a ``(0, F)`` array). With no entries at all
    the result has shape ``(0, width or 0)`` and splits ``[0]``.

    Raises:
        DimensionError: if the entries disagree on their inner width.
    """
    matrices: list[np.ndarray] = []
    inner = width
    for b, row in enumerate(rows):
        arr = np.asarray(row)
        if arr.size == 0 and (arr.ndim < 2 or arr.shape == (0, 0)):
            matrices.append(np.empty((0, 0)))
            continue
        if arr.ndim == 1:
            raise DimensionError(
                f"batch entry {b} must be a matrix, got a vector of length {arr.shape[0]}",
                detail=str(b),
            )
        if arr.ndim != 2:
            raise DimensionError(f"batch entry {b} has shape {arr.shape}", detail=str(b))
        if inner is None:
            inner = arr.shape[1]
        elif arr.shape[1] != inner:
            raise DimensionError(
                f"batch entry {b} has inner width {arr.shape[1]}, expected {inner}",
                detail=str(b),
            )
        matrices.append(arr)

    inner = 0 if inner is None else inner
    non_empty = [m for m in matrices if m.shape[0] > 0]
    if dtype is None:
        if non_empty and all(np.issubdtype(m.dtype, np.integer) for m in non_empty):
            dtype = np.int64
        else:
            dtype = np.float64
    blocks = [m.reshape(m.shape[0], inner).astype(dtype) for m in matrices]
    flat = np.concatenate(blocks, axis=0) if blocks else np.empty((0, inner), dtype=dtype)
    splits = np.concatenate([[0], np.cumsum([m.shape[0] for m in matrices])]).astype(np.int64)
    return Ragged(flat.reshape(flat.shape[0], inner), splits)


@dataclass(frozen=True, eq=False)
class PaddedBatch:
    """Zero-padded dense batch ``(B, N_max, F)`` with a prefix mask ``(B, N_max)``."""

    dense: np.ndarray
    mask: np.ndarray

    def __post_init__(self) -> None:
        dense = np.asarray(self.dense)
        mask = np.asarray(self.mask, dtype=bool)
        if dense.ndim != 3 or mask.shape != dense.shape[:2]:
            raise DimensionError(
                f"dense {dense.shape} and mask {mask.shape} do not describe a padded batch"
            )
        counts = mask.sum(axis=1)
        prefix = np.arange(mask.shape[1])[None, :] < counts[:, None]
        if not np.array_equal(mask, prefix):
            raise GraphValidationError("mask rows must be a prefix of true values")
        object.__setattr__(self, "dense", _frozen(dense))
        object.__setattr__(self, "mask", _frozen(mask))

    @property
    def counts(self) -> np.ndarray:
        return self.mask.sum(axis=1).astype(np.int64)


def to_padded(r: Ragged, pad_value: float = 0.0) -> PaddedBatch:
    counts = r.row_lengths()
    n_max = int(counts.max()) if counts.size else 0
    dense = np.full((r.nrows, n_max, r.width), pad_value, dtype=r.dtype)
    mask = np.arange(n_max)[None, :] < counts[:, None]
    dense[mask] = r.flat_values
    return PaddedBatch(dense, mask)


def from_padded(p: PaddedBatch) -> Ragged:
    return Ragged.from_row_lengths(p.dense[p.mask], p.counts)
