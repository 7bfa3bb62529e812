"""Tests for Phase 1: ragged containers, batch conversions, kernels and CSR adjacency."""

from __future__ import annotations

import numpy as np
import pytest

from raggednn import kernels
from raggednn.adjacency import AdjacencyCsr, adjacency_from_edges
from raggednn.batch import DisjointBatch, GraphBatch, from_disjoint, to_disjoint
from raggednn.diagnostics import random_graph_batch
from raggednn.exceptions import DimensionError, GraphValidationError
from raggednn.ragged import PaddedBatch, Ragged, from_padded, ragged_from_rows, to_padded


def _figure_batch() -> GraphBatch:
    return GraphBatch.from_graphs(
        node_features=[[[0.0], [1.0]], [[2.0], [3.0], [4.0]]],
        edge_indices=[[[0, 1]], [[0, 1], [2, 0]]],
    )


# --- Ragged ---


class TestRagged:
    def test_from_rows_concatenates(self):
        r = ragged_from_rows([[[1, 2]], [[3, 4], [5, 6]]])
        np.testing.assert_array_equal(r.flat_values, [[1, 2], [3, 4], [5, 6]])
        np.testing.assert_array_equal(r.row_splits, [0, 1, 3])
        assert r.dtype == np.int64

    def test_zero_entries(self):
        r = ragged_from_rows([])
        assert r.flat_values.shape == (0, 0)
        np.testing.assert_array_equal(r.row_splits, [0])
        assert r.nrows == 0

    def test_only_empty_entries_keep_width(self):
        r = ragged_from_rows([[], np.zeros((0, 3))], width=3)
        assert r.flat_values.shape == (0, 3)
        np.testing.assert_array_equal(r.row_splits, [0, 0, 0])

    def test_no_entries_with_width(self):
        r = ragged_from_rows([], width=4)
        assert r.flat_values.shape == (0, 4)
        assert r.nrows == 0

    def test_empty_middle_entry(self):
        r = ragged_from_rows([[[1]], [], [[2]]])
        np.testing.assert_array_equal(r.flat_values, [[1], [2]])
        np.testing.assert_array_equal(r.row_splits, [0, 1, 1, 2])
        assert r.row(1).shape == (0, 1)

    def test_width_mismatch(self):
        with pytest.raises(DimensionError, match="inner width"):
            ragged_from_rows([[[1, 2]], [[3]]])

    def test_vector_entry_rejected(self):
        with pytest.raises(DimensionError, match="matrix"):
            ragged_from_rows([[1, 2, 3]])

    def test_bad_splits(self):
        with pytest.raises(GraphValidationError):
            Ragged(np.zeros((3, 1)), np.array([0, 2, 1, 3]))
        with pytest.raises(GraphValidationError):
            Ragged(np.zeros((3, 1)), np.array([1, 3]))
        with pytest.raises(GraphValidationError, match="ends at"):
            Ragged(np.zeros((3, 1)), np.array([0, 2]))

    def test_accessors(self):
        r = Ragged.from_row_lengths(np.arange(6.0).reshape(6, 1), [2, 0, 4])
        np.testing.assert_array_equal(r.row_lengths(), [2, 0, 4])
        np.testing.assert_array_equal(r.value_rowids(), [0, 0, 2, 2, 2, 2])
        assert [row.shape[0] for row in r.rows()] == [2, 0, 4]
        assert r.total_rows == 6 and r.width == 1

    def test_buffers_are_read_only(self):
        r = ragged_from_rows([[[1.0]]])
        with pytest.raises(ValueError):
            r.flat_values[0, 0] = 5.0


# --- Padded ---


class TestPadded:
    def test_pad_example(self):
        r = ragged_from_rows([[[1.0], [2.0]], [[3.0]]])
        p = to_padded(r)
        np.testing.assert_array_equal(p.dense, [[[1.0], [2.0]], [[3.0], [0.0]]])
        np.testing.assert_array_equal(p.mask, [[True, True], [True, False]])

    def test_uniform_sizes_mask_all_true(self):
        p = to_padded(ragged_from_rows([np.ones((3, 2)), np.zeros((3, 2))]))
        assert p.mask.all()

    def test_empty_row_is_all_padding(self):
        p = to_padded(ragged_from_rows([[[1.0]], []]), pad_value=-1.0)
        assert not p.mask[1].any()
        np.testing.assert_array_equal(p.dense[1], [[-1.0]])

    def test_non_prefix_mask_rejected(self):
        with pytest.raises(GraphValidationError, match="prefix"):
            PaddedBatch(np.zeros((1, 2, 1)), np.array([[False, True]]))

    def test_round_trip_random(self, rng):
        for _ in range(200):
            b = int(rng.integers(0, 8))
            rows = [rng.normal(size=(int(rng.integers(0, 10)), 3)) for _ in range(b)]
            r = ragged_from_rows(rows, width=3)
            assert from_padded(to_padded(r)).equals(r)


# --- Disjoint ---


class TestDisjoint:
    def test_figure_offsets(self):
        d = to_disjoint(_figure_batch())
        np.testing.assert_array_equal(d.edge_index_global, [[0, 1], [2, 3], [4, 2]])
        np.testing.assert_array_equal(d.node_graph_id, [0, 0, 1, 1, 1])
        np.testing.assert_array_equal(d.edge_graph_id, [0, 1, 1])

    def test_single_graph_zero_offset(self):
        batch = GraphBatch.from_graphs([np.ones((3, 1))], [[[0, 2], [2, 1]]])
        d = to_disjoint(batch)
        np.testing.assert_array_equal(d.edge_index_global, batch.edge_index.flat_values)

    def test_edgeless_graph(self):
        batch = GraphBatch.from_graphs([np.ones((2, 1)), np.ones((3, 1))], [[], [[0, 1]]])
        d = to_disjoint(batch)
        np.testing.assert_array_equal(d.edge_index_global, [[2, 3]])
        np.testing.assert_array_equal(d.edge_splits(), [0, 0, 1])

    def test_round_trip_example(self):
        batch = _figure_batch()
        assert from_disjoint(to_disjoint(batch)).equals(batch)

    def test_empty_batch(self):
        d = DisjointBatch(
            node_matrix=np.zeros((0, 2)),
            edge_index_global=np.zeros((0, 2), dtype=np.int64),
            node_graph_id=np.zeros(0, dtype=np.int64),
            edge_graph_id=np.zeros(0, dtype=np.int64),
            num_graphs=0,
        )
        batch = from_disjoint(d)
        assert batch.num_graphs == 0
        assert batch.nodes.total_rows == 0

    def test_offset_oracle_random(self, rng):
        for _ in range(100):
            batch = random_graph_batch(rng, num_graphs=int(rng.integers(1, 8)), max_nodes=10)
            d = to_disjoint(batch)
            offsets = np.cumsum([0, *batch.node_counts()[:-1]])
            expected = [
                local + offsets[b]
                for b in range(batch.num_graphs)
                for local in batch.edge_index.row(b)
            ]
            np.testing.assert_array_equal(
                d.edge_index_global, np.asarray(expected, dtype=np.int64).reshape(-1, 2)
            )
            assert from_disjoint(d).equals(batch)

    def test_cross_graph_edge_rejected(self):
        with pytest.raises(GraphValidationError, match="outside graph"):
            DisjointBatch(
                node_matrix=np.zeros((3, 1)),
                edge_index_global=np.array([[0, 2]]),
                node_graph_id=np.array([0, 0, 1]),
                edge_graph_id=np.array([0]),
                num_graphs=2,
            )

    def test_local_edge_out_of_range(self):
        with pytest.raises(GraphValidationError, match="edge index 5"):
            GraphBatch.from_graphs([np.ones((2, 1))], [[[0, 5]]])

    def test_supervision_survives_round_trip(self, small_batch):
        d = to_disjoint(small_batch)
        np.testing.assert_array_equal(d.targets, [[0.5], [1.5]])
        back = from_disjoint(d)
        assert back.equals(small_batch)


# --- Kernels ---


class TestKernels:
    def test_segment_sum_example(self):
        out = kernels.segment_reduce([[1.0], [2.0], [3.0], [4.0]], [0, 0, 1, 1], 2, "sum")
        np.testing.assert_array_equal(out, [[3.0], [7.0]])

    def test_segment_mean_empty_segment_is_zero(self):
        out = kernels.segment_reduce([[1.0], [2.0], [3.0], [4.0]], [0, 0, 2, 2], 3, "mean")
        np.testing.assert_array_equal(out, [[1.5], [0.0], [3.5]])

    def test_segment_max(self):
        out = kernels.segment_reduce([[1.0, 9.0], [5.0, 2.0]], [0, 0], 2, "max")
        np.testing.assert_array_equal(out, [[5.0, 9.0], [0.0, 0.0]])

    def test_segment_argmax_ties_lowest_row(self):
        rows = kernels.segment_argmax([[2.0], [2.0], [1.0]], [0, 0, 0], 1)
        np.testing.assert_array_equal(rows, [[0]])

    def test_sum_matches_loop(self, rng):
        values = rng.normal(size=(50, 3))
        ids = rng.integers(0, 7, size=50)
        np.testing.assert_allclose(
            kernels.segment_reduce(values, ids, 7, "sum"),
            kernels.segment_sum_loop(values, ids, 7),
            rtol=0,
            atol=1e-12,
        )
        np.testing.assert_allclose(
            kernels.segment_reduce(values, ids, 7, "mean"),
            kernels.segment_mean_loop(values, ids, 7),
            atol=1e-12,
        )
        np.testing.assert_array_equal(
            kernels.segment_reduce(values, ids, 7, "max"), kernels.segment_max_loop(values, ids, 7)
        )

    def test_out_of_range_ids(self):
        with pytest.raises(GraphValidationError):
            kernels.segment_reduce([[1.0]], [3], 2)

    def test_gather_rows(self):
        m = [[1.0], [2.0], [3.0]]
        np.testing.assert_array_equal(kernels.gather_rows(m, [2, 0]), [[3.0], [1.0]])
        np.testing.assert_array_equal(kernels.gather_rows(m, [1, 1]), [[2.0], [2.0]])
        assert kernels.gather_rows(m, np.zeros(0, dtype=np.int64)).shape == (0, 1)
        with pytest.raises(GraphValidationError):
            kernels.gather_rows(m, [3])

    def test_segment_softmax(self):
        np.testing.assert_allclose(kernels.segment_softmax([[0.0], [0.0]], [0, 0], 1), [[0.5]] * 2)
        np.testing.assert_allclose(kernels.segment_softmax([[7.0]], [0], 1), [[1.0]])
        out = kernels.segment_softmax([[1000.0], [1001.0]], [0, 0], 1)
        e = np.e
        np.testing.assert_allclose(out, [[1 / (1 + e)], [e / (1 + e)]], rtol=1e-12)


# --- Adjacency ---


class TestAdjacency:
    def test_symmetric_pair(self):
        batch = GraphBatch.from_graphs([np.ones((2, 1))], [[[0, 1], [1, 0]]])
        a = adjacency_from_edges(to_disjoint(batch))
        np.testing.assert_array_equal(a.to_dense(), [[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_array_equal(a.row_ptr, [0, 1, 2])

    def test_edgeless(self):
        batch = GraphBatch.from_graphs([np.ones((3, 1))], [[]])
        a = adjacency_from_edges(to_disjoint(batch))
        np.testing.assert_array_equal(a.row_ptr, [0, 0, 0, 0])
        assert a.nnz == 0

    def test_block_diagonal(self):
        d = to_disjoint(_figure_batch())
        dense = adjacency_from_edges(d).to_dense()
        expected = np.zeros((5, 5))
        expected[d.receivers, d.senders] = 1.0
        np.testing.assert_array_equal(dense, expected)
        assert not dense[:2, 2:].any() and not dense[2:, :2].any()

    def test_duplicate_edge_rejected(self):
        batch = GraphBatch.from_graphs([np.ones((2, 1))], [[[0, 1], [0, 1]]])
        with pytest.raises(GraphValidationError, match="duplicate edge"):
            adjacency_from_edges(to_disjoint(batch))

    def test_scipy_round_trip(self, rng):
        d = to_disjoint(random_graph_batch(rng, num_graphs=4, max_nodes=8))
        a = adjacency_from_edges(d, rng.normal(size=d.num_edges))
        back = AdjacencyCsr.from_scipy(a.to_scipy())
        np.testing.assert_array_equal(back.to_dense(), a.to_dense())

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_weighted_matches_dense(self, seed):
        rng = np.random.default_rng(seed)
        d = to_disjoint(random_graph_batch(rng, num_graphs=5, max_nodes=7, edge_prob=0.5))
        weights = rng.normal(size=d.num_edges)
        a = adjacency_from_edges(d, weights)
        expected = np.zeros((d.num_nodes, d.num_nodes))
        expected[d.receivers, d.senders] = weights
        np.testing.assert_array_equal(a.to_dense(), expected)
        assert a.nnz == d.num_edges
        np.testing.assert_array_equal(a.row_ids(), np.sort(d.receivers))

    def test_zero_weight_edge_is_stored(self):
        batch = GraphBatch.from_graphs([np.ones((2, 1))], [[[1, 0], [0, 1]]])
        a = adjacency_from_edges(to_disjoint(batch), [0.0, 2.0])
        assert a.nnz == 2
        np.testing.assert_array_equal(a.col_idx, [1, 0])
        np.testing.assert_array_equal(a.values, [2.0, 0.0])

    def test_unsorted_columns_rejected(self):
        with pytest.raises(GraphValidationError, match="increasing"):
            AdjacencyCsr(np.array([0, 2, 2]), np.array([1, 0]), np.ones(2))
