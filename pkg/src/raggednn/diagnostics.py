"""Finite-difference gradient checks for every layer family and full models.

Each case builds a small seeded batch, layers with smooth activations and a
scalar objective ``sum(out * R)`` for a fixed random ``R``, then reports the
largest relative error of `grad_check`.
"""

from __future__ import annotations

from functools import partial
from typing import Callable

import numpy as np

from . import autodiff as ad
from .autodiff import Node, Tape, Variable, away_from_kinks, grad_check
from .batch import DisjointBatch, GraphBatch, to_disjoint
from .exceptions import NotRegisteredError
from .layers import (
    MLP,
    ConcatMLP,
    DenseLayer,
    GRUCell,
    MessagePassingConfig,
    NodeState,
    Set2Set,
    gaussian_basis,
    gaussian_centers,
    gcn_adjacency,
    gcn_conv,
    interaction_block,
    megnet_block,
    message_passing,
    readout_reduce,
    schnet_interaction,
    topk_pool,
)
from .models import MODEL_CLASSES, build_model
from .schemas import ModelSpec, Widths

GradCase = Callable[[int, float], float]


def random_graph_batch(
    rng: np.random.Generator,
    num_graphs: int = 3,
    node_width: int = 3,
    edge_width: int = 0,
    state_width: int = 0,
    min_nodes: int = 1,
    max_nodes: int = 6,
    edge_prob: float = 0.4,
) -> GraphBatch:
    """Random directed graphs without self-loops or duplicate edges."""
    nodes, edges, edge_feats, states = [], [], [], []
    for _ in range(num_graphs):
        n = int(rng.integers(min_nodes, max_nodes + 1))
        nodes.append(away_from_kinks(rng.normal(size=(n, node_width))))
        mask = (rng.random((n, n)) < edge_prob) & ~np.eye(n, dtype=bool)
        receivers, senders = np.nonzero(mask)
        edges.append(np.stack([receivers, senders], axis=1).astype(np.int64))
        edge_feats.append(rng.normal(size=(receivers.shape[0], edge_width)))
        states.append(rng.normal(size=state_width))
    return GraphBatch.from_graphs(
        nodes,
        edges,
        edge_features=edge_feats if edge_width else None,
        states=states if state_width else None,
    )


def _objective(out: Node, rng: np.random.Generator) -> Node:
    weights = rng.normal(size=out.shape)
    return ad.sum_all(out * out.tape.constant(weights))


def _check(
    build: Callable[[Tape], Node], params: list[Variable], seed: int, eps: float
) -> float:
    weights_seed = seed + 7919

    def f(tape: Tape) -> Node:
        return _objective(build(tape), np.random.default_rng(weights_seed))

    return grad_check(f, params, eps=eps)


def _params(*layers: object) -> list[Variable]:
    found: list[Variable] = []
    for layer in layers:
        if isinstance(layer, Variable):
            found.append(layer)
        else:
            found.extend(layer.parameters())  # type: ignore[attr-defined]
    return found


def _disjoint(rng: np.random.Generator, **kwargs: int) -> DisjointBatch:
    return to_disjoint(random_graph_batch(rng, **kwargs))


def check_gcn(seed: int, eps: float) -> float:
    rng = np.random.default_rng(seed)
    d = _disjoint(rng)
    layer = DenseLayer(3, 4, "tanh", rng)
    a_norm = gcn_adjacency(d)

    def build(tape: Tape) -> Node:
        return gcn_conv(tape.constant(d.node_matrix), a_norm, layer)

    return _check(build, _params(layer), seed, eps)


def check_mpn(seed: int, eps: float) -> float:
    rng = np.random.default_rng(seed)
    d = _disjoint(rng, edge_width=2)
    message = ConcatMLP([3 + 3 + 2, 5, 3], "tanh", rng)
    cell = GRUCell(3, 3, rng)
    cfg = MessagePassingConfig([message], [lambda h, m: cell(m, h)], steps=2)

    def build(tape: Tape) -> Node:
        state = NodeState(tape.constant(d.node_matrix), d.node_splits())
        out = message_passing(state, d, cfg, tape.constant(d.edge_matrix))
        return readout_reduce(out, "sum")

    return _check(build, _params(message, cell), seed, eps)


def check_interaction(seed: int, eps: float) -> float:
    rng = np.random.default_rng(seed)
    d = _disjoint(rng, edge_width=2)
    phi_r = ConcatMLP([3 + 3 + 2, 4, 4], "tanh", rng)
    phi_o = ConcatMLP([3 + 4, 4, 3], "tanh", rng)

    def build(tape: Tape) -> Node:
        _, h = interaction_block(
            tape.constant(d.node_matrix), d, phi_r, phi_o, tape.constant(d.edge_matrix)
        )
        return h

    return _check(build, _params(phi_r, phi_o), seed, eps)


def check_schnet(seed: int, eps: float) -> float:
    rng = np.random.default_rng(seed)
    d = _disjoint(rng)
    distances = rng.uniform(0.5, 3.0, size=d.num_edges)
    basis = gaussian_basis(distances, gaussian_centers(6, 4.0), gamma=2.0)
    embed = DenseLayer(3, 4, "linear", rng)
    filter_fn = MLP([6, 4, 4], "shifted_softplus", rng)
    in_fn = DenseLayer(4, 4, "linear", rng, use_bias=False)
    out_fn = MLP([4, 4, 4], "shifted_softplus", rng, out_activation="linear", use_bias=False)

    def build(tape: Tape) -> Node:
        x = embed(tape.constant(d.node_matrix))
        return schnet_interaction(x, d, tape.constant(basis), filter_fn, in_fn, out_fn)

    return _check(build, _params(embed, filter_fn, in_fn, out_fn), seed, eps)


def check_megnet(seed: int, eps: float) -> float:
    rng = np.random.default_rng(seed)
    d = _disjoint(rng, edge_width=3, state_width=3)
    phi_e = ConcatMLP([12, 4, 3], "tanh", rng)
    phi_v = ConcatMLP([9, 4, 3], "tanh", rng)
    phi_u = ConcatMLP([9, 4, 3], "tanh", rng)

    def build(tape: Tape) -> Node:
        _, h, u = megnet_block(
            tape.constant(d.node_matrix),
            d,
            tape.constant(d.edge_matrix),
            tape.constant(d.state),
            phi_e,
            phi_v,
            phi_u,
        )
        return ad.concat([readout_reduce(NodeState(h, d.node_splits()), "mean"), u])

    return _check(build, _params(phi_e, phi_v, phi_u), seed, eps)


def check_set2set(seed: int, eps: float) -> float:
    rng = np.random.default_rng(seed)
    d = _disjoint(rng)
    layer = Set2Set(3, steps=2, rng=rng)
    return _check(
        lambda tape: layer(NodeState(tape.constant(d.node_matrix), d.node_splits())),
        _params(layer),
        seed,
        eps,
    )


def check_topk(seed: int, eps: float) -> float:
    rng = np.random.default_rng(seed)
    d = _disjoint(rng, min_nodes=2)
    embed = DenseLayer(3, 4, "tanh", rng)
    p = Variable(rng.normal(size=(4, 1)), name="p")

    def build(tape: Tape) -> Node:
        state = NodeState(embed(tape.constant(d.node_matrix)), d.node_splits())
        return topk_pool(state, d, tape.watch(p), ratio=0.5).state.h

    return _check(build, _params(embed, p), seed, eps)


def check_model(name: str, seed: int, eps: float) -> float:
    """Whole-model check over every parameter, with edge features and graph state."""
    rng = np.random.default_rng(seed)
    batch = random_graph_batch(rng, edge_width=3, state_width=2, min_nodes=2)
    spec = ModelSpec(
        model=name,
        task="graph_regression",
        layers=[4],
        widths=Widths(node=3, edge=3, state=2, output=2, mlp=4),
        activation="tanh",
        steps=2,
        set2set_steps=2,
        pool_levels=1,
        seed=seed,
    )
    model = build_model(spec)
    return _check(lambda tape: model.forward(tape, batch), model.parameters(), seed, eps)


GRADCHECK_CASES: dict[str, GradCase] = {
    "gcn": check_gcn,
    "mpn": check_mpn,
    "interaction": check_interaction,
    "schnet": check_schnet,
    "megnet": check_megnet,
    "unet": partial(check_model, "unet"),
    "set2set": check_set2set,
    "topk": check_topk,
}
GRADCHECK_CASES.update(
    {f"model:{name}": partial(check_model, name) for name in MODEL_CLASSES if name != "unet"}
)


def run_gradcheck(layer: str, seed: int = 0, eps: float = 1e-5) -> dict[str, float]:
    """Max relative error per case; ``layer="all"`` runs every case in order."""
    if layer == "all":
        names = list(GRADCHECK_CASES)
    elif layer in GRADCHECK_CASES:
        names = [layer]
    else:
        raise NotRegisteredError("layer", layer, [*GRADCHECK_CASES, "all"])
    return {name: GRADCHECK_CASES[name](seed, eps) for name in names}
