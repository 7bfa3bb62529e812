"""Parameter-owning building blocks: dense layers, MLPs and a gated recurrent cell."""

from __future__ import annotations

from typing import Any, Callable, Iterator, Sequence

import numpy as np

from .. import autodiff as ad
from ..autodiff import Node, Variable
from ..exceptions import DimensionError, NotRegisteredError

ACTIVATIONS: dict[str, Callable[[Node], Node] | None] = {
    "linear": None,
    "relu": ad.relu,
    "sigmoid": ad.sigmoid,
    "tanh": ad.tanh,
    "softplus": ad.softplus,
    "shifted_softplus": ad.shifted_softplus,
}


def _activation(name: str) -> Callable[[Node], Node] | None:
    if name not in ACTIVATIONS:
        raise NotRegisteredError("activation", name, list(ACTIVATIONS))
    return ACTIVATIONS[name]


class Layer:
    """Base for anything that owns trainable variables.

    Parameters are discovered by walking instance attributes in definition
    order, so names are stable across builds of the same spec.
    """

    def named_parameters(self, prefix: str = "") -> list[tuple[str, Variable]]:
        found: list[tuple[str, Variable]] = []
        for attr, value in vars(self).items():
            for name, var in _walk(value, f"{prefix}{attr}"):
                found.append((name, var))
        return found

    def parameters(self) -> list[Variable]:
        return [var for _, var in self.named_parameters()]

    def zero_grad(self) -> None:
        for var in self.parameters():
            var.zero_grad()


def _walk(value: Any, name: str) -> Iterator[tuple[str, Variable]]:
    if isinstance(value, Variable):
        yield name, value
    elif isinstance(value, Layer):
        yield from value.named_parameters(prefix=f"{name}.")
    elif isinstance(value, (list, tuple)):
        for i, item in enumerate(value):
            yield from _walk(item, f"{name}.{i}")


def glorot_uniform(rng: np.random.Generator, fan_in: int, fan_out: int) -> np.ndarray:
    limit = np.sqrt(6.0 / max(fan_in + fan_out, 1))
    return rng.uniform(-limit, limit, size=(fan_in, fan_out))


class DenseLayer(Layer):
    """``activation(x @ W + b)`` recorded on the input's tape."""

    def __init__(
        self,
        in_width: int,
        out_width: int,
        activation: str = "linear",
        rng: np.random.Generator | None = None,
        use_bias: bool = True,
    ) -> None:
        rng = rng if rng is not None else np.random.default_rng(0)
        self.activation = activation
        self._act = _activation(activation)
        self.W = Variable(glorot_uniform(rng, in_width, out_width), name="W")
        self.b = Variable(np.zeros(out_width), name="b") if use_bias else None

    @classmethod
    def from_arrays(cls, W: Any, b: Any = None, activation: str = "linear") -> DenseLayer:
        W = np.asarray(W, dtype=np.float64)
        layer = cls(W.shape[0], W.shape[1], activation, use_bias=b is not None)
        layer.W = Variable(W, name="W")
        if b is not None:
            layer.b = Variable(np.asarray(b, dtype=np.float64).reshape(-1), name="b")
        return layer

    @property
    def in_width(self) -> int:
        return self.W.shape[0]

    @property
    def out_width(self) -> int:
        return self.W.shape[1]

    def linear(self, x: Node) -> Node:
        """``x @ W`` without bias or activation."""
        if x.shape[-1] != self.in_width or len(x.shape) != 2:
            raise DimensionError(
                f"dense layer expects width {self.in_width}, got input of shape {x.shape}",
                detail="dense",
            )
        return ad.matmul(x, x.tape.watch(self.W))

    def finish(self, z: Node) -> Node:
        """Add the bias and apply the activation to a pre-activation."""
        if self.b is not None:
            z = ad.bias_add(z, z.tape.watch(self.b))
        return z if self._act is None else self._act(z)

    def __call__(self, x: Node) -> Node:
        return self.finish(self.linear(x))


class MLP(Layer):
    """Stack of dense layers over ``widths = [in, hidden..., out]``."""

    def __init__(
        self,
        widths: Sequence[int],
        activation: str = "relu",
        rng: np.random.Generator | None = None,
        out_activation: str | None = None,
        use_bias: bool = True,
    ) -> None:
        if len(widths) < 2:
            raise DimensionError(f"MLP needs at least input and output widths, got {widths}")
        rng = rng if rng is not None else np.random.default_rng(0)
        last = activation if out_activation is None else out_activation
        self.layers = [
            DenseLayer(
                widths[k],
                widths[k + 1],
                activation if k < len(widths) - 2 else last,
                rng=rng,
                use_bias=use_bias,
            )
            for k in range(len(widths) - 1)
        ]

    @property
    def in_width(self) -> int:
        return self.layers[0].in_width

    @property
    def out_width(self) -> int:
        return self.layers[-1].out_width

    def __call__(self, x: Node) -> Node:
        for layer in self.layers:
            x = layer(x)
        return x


class ConcatMLP(MLP):
    """MLP over the column-concatenation of its arguments.

    ``None`` arguments are skipped, so an optional edge-feature input simply
    drops out of the concatenation.
    """

    def __call__(self, *parts: Node | None) -> Node:  # type: ignore[override]
        present = [p for p in parts if p is not None and p.shape[1] > 0]
        return super().__call__(ad.concat(present))


class GRUCell(Layer):
    """Gated recurrent cell: ``h' = n + z * (h - n)``."""

    def __init__(
        self, input_width: int, hidden_width: int, rng: np.random.Generator | None = None
    ) -> None:
        rng = rng if rng is not None else np.random.default_rng(0)
        self.hidden_width = hidden_width
        self.update_gate = DenseLayer(input_width + hidden_width, hidden_width, "sigmoid", rng)
        self.reset_gate = DenseLayer(input_width + hidden_width, hidden_width, "sigmoid", rng)
        self.candidate_x = DenseLayer(input_width, hidden_width, "linear", rng)
        self.candidate_h = DenseLayer(hidden_width, hidden_width, "linear", rng, use_bias=False)

    def __call__(self, x: Node, h: Node) -> Node:
        xh = ad.concat([x, h])
        z = self.update_gate(xh)
        r = self.reset_gate(xh)
        n = ad.tanh(self.candidate_x(x) + self.candidate_h(r * h))
        return n + z * (h - n)
