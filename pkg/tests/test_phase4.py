"""Tests for Phase 4: the six architectures behind build_model."""

from __future__ import annotations

import numpy as np
import pytest

from raggednn.batch import GraphBatch
from raggednn.diagnostics import GRADCHECK_CASES, check_model, random_graph_batch
from raggednn.exceptions import ConfigError, NotRegisteredError
from raggednn.models import MODEL_CLASSES, build_model
from raggednn.ragged import Ragged
from raggednn.schemas import ModelSpec

MODELS = ["gcn", "interaction", "mpn", "schnet", "megnet", "unet"]


def _spec(model: str, task: str = "graph_regression", output: int = 2, **overrides) -> ModelSpec:
    fields = {
        "model": model,
        "task": task,
        "layers": [4, 4],
        "widths": {"node": 3, "edge": 2, "output": output, "mlp": 5},
        "activation": "tanh",
        "steps": 2,
        "set2set_steps": 2,
        "pool_levels": 1,
        "seed": 3,
    }
    fields.update(overrides)
    return ModelSpec(**fields)


def _batch(seed: int = 0, num_graphs: int = 4) -> GraphBatch:
    return random_graph_batch(
        np.random.default_rng(seed), num_graphs=num_graphs, node_width=3, edge_width=2
    )


def _permute_graph(batch: GraphBatch, b: int, perm: np.ndarray) -> GraphBatch:
    """Relabel the nodes of graph ``b``; row ``k`` of the result is old node ``perm[k]``."""
    inverse = np.empty_like(perm)
    inverse[perm] = np.arange(perm.shape[0])
    nodes = [batch.nodes.row(k) for k in range(batch.num_graphs)]
    edges = [batch.edge_index.row(k) for k in range(batch.num_graphs)]
    nodes[b] = nodes[b][perm]
    edges[b] = inverse[edges[b]]
    return GraphBatch.from_graphs(nodes, edges, edge_features=batch.edges.rows())


# --- Registry ---


class TestRegistry:
    def test_all_models_registered(self):
        assert sorted(MODEL_CLASSES) == sorted(MODELS)

    def test_unknown_model(self):
        with pytest.raises(NotRegisteredError, match="gat"):
            build_model(_spec("gat"))

    def test_unresolved_widths(self):
        spec = ModelSpec(model="gcn", task="graph_regression")
        with pytest.raises(ConfigError, match="widths.node"):
            build_model(spec)

    @pytest.mark.parametrize("model", ["mpn", "schnet", "megnet", "unet"])
    def test_uniform_width_required(self, model):
        with pytest.raises(ConfigError, match="layers\\[1\\]"):
            build_model(_spec(model, layers=[4, 6]))

    @pytest.mark.parametrize("model", ["interaction", "schnet", "megnet"])
    def test_edge_features_required(self, model):
        spec = _spec(model, widths={"node": 3, "output": 2})
        with pytest.raises(ConfigError, match="edge features"):
            build_model(spec)

    def test_same_seed_same_parameters(self):
        first = build_model(_spec("mpn")).named_parameters()
        second = build_model(_spec("mpn")).named_parameters()
        assert [n for n, _ in first] == [n for n, _ in second]
        for (_, a), (_, b) in zip(first, second):
            np.testing.assert_array_equal(a.value, b.value)


# --- Forward pass ---


class TestForward:
    @pytest.mark.parametrize("model", MODELS)
    def test_graph_output_shape(self, model):
        out = build_model(_spec(model)).predict(_batch())
        assert out.shape == (4, 2)
        assert np.all(np.isfinite(out))

    @pytest.mark.parametrize("model", MODELS)
    def test_batched_matches_per_graph(self, model):
        net = build_model(_spec(model))
        batch = _batch(seed=5, num_graphs=5)
        together = net.predict(batch)
        alone = np.vstack([net.predict(batch.graph(b)) for b in range(batch.num_graphs)])
        np.testing.assert_allclose(together, alone, rtol=0, atol=1e-10)

    @pytest.mark.parametrize("model", MODELS)
    def test_node_permutation_invariance(self, model):
        net = build_model(_spec(model))
        batch = _batch(seed=7, num_graphs=3)
        count = int(batch.node_counts()[1])
        perm = np.random.default_rng(8).permutation(count)
        np.testing.assert_allclose(
            net.predict(batch), net.predict(_permute_graph(batch, 1, perm)), rtol=0, atol=1e-10
        )

    @pytest.mark.parametrize("model", MODELS)
    def test_edgeless_graph_in_batch(self, model):
        batch = GraphBatch.from_graphs(
            [np.ones((2, 3)), np.full((3, 3), 0.5)],
            [[], [[0, 1], [1, 2]]],
            edge_features=[np.zeros((0, 2)), np.ones((2, 2))],
        )
        out = build_model(_spec(model)).predict(batch)
        assert out.shape == (2, 2)
        assert np.all(np.isfinite(out))

    def test_unet_single_node_graph(self):
        batch = GraphBatch.from_graphs(
            [[[1.0, 0.0, 0.0]]], [[]], edge_features=[np.zeros((0, 2))]
        )
        out = build_model(_spec("unet", layers=[4], pool_levels=2)).predict(batch)
        assert out.shape == (1, 2)
        assert np.all(np.isfinite(out))

    def test_node_classification_is_ragged(self):
        net = build_model(_spec("gcn", task="node_classification", output=3))
        batch = _batch()
        out = net.predict(batch)
        assert isinstance(out, Ragged)
        assert out.width == 3
        np.testing.assert_array_equal(out.row_splits, batch.nodes.row_splits)

    @pytest.mark.parametrize("readout", ["sum", "mean", "max", "set2set"])
    def test_readout_override(self, readout):
        out = build_model(_spec("gcn", readout=readout)).predict(_batch())
        assert out.shape == (4, 2)

    def test_megnet_uses_graph_state(self):
        rng = np.random.default_rng(2)
        batch = random_graph_batch(rng, num_graphs=3, node_width=3, edge_width=2, state_width=2)
        spec = _spec("megnet", widths={"node": 3, "edge": 2, "state": 2, "output": 1})
        net = build_model(spec)
        zeroed = GraphBatch(
            nodes=batch.nodes,
            edge_index=batch.edge_index,
            edges=batch.edges,
            state=np.zeros((3, 2)),
        )
        assert not np.allclose(net.predict(batch), net.predict(zeroed))


# --- Inference mode ---


class TestFreeze:
    def test_freeze_makes_parameters_read_only(self):
        net = build_model(_spec("gcn"))
        net.freeze()
        assert net.frozen
        with pytest.raises(ValueError):
            net.parameters()[0].value[0, 0] = 1.0
        net.unfreeze()
        net.parameters()[0].value[0, 0] = 1.0

    def test_predict_is_repeatable(self):
        net = build_model(_spec("schnet"))
        batch = _batch()
        np.testing.assert_array_equal(net.predict(batch), net(batch))


# --- Finite differences per model ---


class TestModelGradients:
    @pytest.mark.parametrize("seed", [0, 1])
    @pytest.mark.parametrize("model", MODELS)
    def test_every_parameter(self, model, seed):
        assert check_model(model, seed, 1e-5) <= 1e-4

    def test_every_model_is_a_gradcheck_case(self):
        for model in MODELS:
            assert model in GRADCHECK_CASES or f"model:{model}" in GRADCHECK_CASES
