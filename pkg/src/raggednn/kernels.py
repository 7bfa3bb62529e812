"""Segment and gather kernels over flat row buffers.

Every aggregation and readout in the library reduces to these. Segment ids
need not be sorted; empty segments reduce to zero for every reducer.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .exceptions import DimensionError, GraphValidationError, NotRegisteredError

REDUCERS = ("sum", "mean", "max")


def _as_matrix(values: Any, name: str = "values") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a matrix, got shape {arr.shape}", detail=name)
    return arr


def check_index_vector(indices: Any, upper: int, name: str = "indices") -> np.ndarray:
    """Validate a 1-D integer index vector against ``[0, upper)``."""
    idx = np.asarray(indices)
    if idx.ndim != 1:
        raise DimensionError(f"{name} must be a vector, got shape {idx.shape}", detail=name)
    if idx.size == 0:
        return idx.astype(np.int64)
    if not np.issubdtype(idx.dtype, np.integer):
        raise GraphValidationError(f"{name} must be integers, got {idx.dtype}", detail=name)
    idx = idx.astype(np.int64)
    bad = (idx < 0) | (idx >= upper)
    if np.any(bad):
        first = int(idx[np.argmax(bad)])
        raise GraphValidationError(
            f"{name} contains {first}, outside [0, {upper})", detail=name
        )
    return idx


def _check_segments(values: np.ndarray, segment_ids: Any, num_segments: int) -> np.ndarray:
    if num_segments < 0:
        raise GraphValidationError(f"num_segments must be >= 0, got {num_segments}")
    ids = check_index_vector(segment_ids, num_segments, name="segment_ids")
    if ids.shape[0] != values.shape[0]:
        raise DimensionError(
            f"{ids.shape[0]} segment ids for {values.shape[0]} rows", detail="segment_ids"
        )
    return ids


def segment_counts(segment_ids: np.ndarray, num_segments: int) -> np.ndarray:
    return np.bincount(segment_ids, minlength=num_segments).astype(np.int64)


def segment_reduce(
    values: Any, segment_ids: Any, num_segments: int, reducer: str = "sum"
) -> np.ndarray:
    """Reduce rows of ``values`` grouped by ``segment_ids`` into ``(num_segments, F)``."""
    vals = _as_matrix(values)
    ids = _check_segments(vals, segment_ids, num_segments)
    out = np.zeros((num_segments, vals.shape[1]), dtype=np.float64)
    if reducer == "sum":
        np.add.at(out, ids, vals)
        return out
    if reducer == "mean":
        np.add.at(out, ids, vals)
        counts = segment_counts(ids, num_segments)
        nonempty = counts > 0
        out[nonempty] /= counts[nonempty, None]
        return out
    if reducer == "max":
        out.fill(-np.inf)
        np.maximum.at(out, ids, vals)
        out[segment_counts(ids, num_segments) == 0] = 0.0
        return out
    raise NotRegisteredError("reducer", reducer, list(REDUCERS))


def segment_argmax(values: Any, segment_ids: Any, num_segments: int) -> np.ndarray:
    """Row index of each segment's maximum per column; ties go to the lowest row.

    Empty segments report -1.
    """
    vals = _as_matrix(values)
    ids = _check_segments(vals, segment_ids, num_segments)
    n_rows = vals.shape[0]
    maxes = np.full((num_segments, vals.shape[1]), -np.inf)
    np.maximum.at(maxes, ids, vals)
    candidates = vals == maxes[ids]
    rows = np.where(candidates, np.arange(n_rows, dtype=np.int64)[:, None], n_rows)
    arg = np.full((num_segments, vals.shape[1]), n_rows, dtype=np.int64)
    np.minimum.at(arg, ids, rows)
    arg[arg == n_rows] = -1
    return arg


def segment_softmax(values: Any, segment_ids: Any, num_segments: int) -> np.ndarray:
    """Column-wise softmax within each segment, shifted by the segment max."""
    vals = _as_matrix(values)
    ids = _check_segments(vals, segment_ids, num_segments)
    maxes = np.full((num_segments, vals.shape[1]), -np.inf)
    np.maximum.at(maxes, ids, vals)
    exps = np.exp(vals - maxes[ids])
    sums = np.zeros_like(maxes)
    np.add.at(sums, ids, exps)
    return exps / sums[ids]


def gather_rows(matrix: Any, indices: Any) -> np.ndarray:
    """``out[k] = matrix[indices[k]]``; duplicate indices are allowed."""
    mat = _as_matrix(matrix, name="matrix")
    idx = check_index_vector(indices, mat.shape[0])
    return mat[idx]


def segment_sum_loop(values: Any, segment_ids: Any, num_segments: int) -> np.ndarray:
    """Row-by-row accumulation; the reference the vectorized kernel is checked against."""
    vals = _as_matrix(values)
    ids = _check_segments(vals, segment_ids, num_segments)
    out = np.zeros((num_segments, vals.shape[1]), dtype=np.float64)
    for row, seg in enumerate(ids.tolist()):
        out[seg] += vals[row]
    return out


def segment_mean_loop(values: Any, segment_ids: Any, num_segments: int) -> np.ndarray:
    out = segment_sum_loop(values, segment_ids, num_segments)
    counts = [0] * num_segments
    for seg in np.asarray(segment_ids, dtype=np.int64).tolist():
        counts[seg] += 1
    for seg, count in enumerate(counts):
        if count:
            out[seg] /= count
    return out


def segment_max_loop(values: Any, segment_ids: Any, num_segments: int) -> np.ndarray:
    vals = _as_matrix(values)
    ids = _check_segments(vals, segment_ids, num_segments)
    out = np.zeros((num_segments, vals.shape[1]), dtype=np.float64)
    seen = [False] * num_segments
    for row, seg in enumerate(ids.tolist()):
        out[seg] = np.maximum(out[seg], vals[row]) if seen[seg] else vals[row]
        seen[seg] = True
    return out


def gather_rows_loop(matrix: Any, indices: Any) -> np.ndarray:
    mat = _as_matrix(matrix, name="matrix")
    idx = check_index_vector(indices, mat.shape[0])
    out = np.empty((idx.shape[0], mat.shape[1]), dtype=np.float64)
    for k, row in enumerate(idx.tolist()):
        out[k] = mat[row]
    return out
