"""Layers composed into the model architectures."""

from .base import MLP, ConcatMLP, DenseLayer, GRUCell, Layer
from .gcn import gcn_adjacency, gcn_conv, gcn_normalize
from .message_passing import (
    MessagePassingConfig,
    NodeState,
    interaction_block,
    megnet_block,
    message_aggregate,
    message_pass_step,
    message_passing,
)
from .pooling import PoolResult, Set2Set, readout_reduce, topk_pool, topk_unpool
from .schnet import cfconv, gaussian_basis, gaussian_centers, schnet_interaction

__all__ = [
    "ConcatMLP",
    "DenseLayer",
    "GRUCell",
    "Layer",
    "MLP",
    "MessagePassingConfig",
    "NodeState",
    "PoolResult",
    "Set2Set",
    "cfconv",
    "gaussian_basis",
    "gaussian_centers",
    "gcn_adjacency",
    "gcn_conv",
    "gcn_normalize",
    "interaction_block",
    "megnet_block",
    "message_aggregate",
    "message_pass_step",
    "message_passing",
    "readout_reduce",
    "schnet_interaction",
    "topk_pool",
    "topk_unpool",
]
