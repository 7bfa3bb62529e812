"""Tape-based reverse-mode differentiation over a small primitive set.

Every primitive is a `Primitive` subclass with a forward rule that records
the values its backward rule needs and a backward rule returning the exact
vector-Jacobian product for each input. Shapes must match exactly; the only
broadcasts are scalar `scale`, row-vector `bias_add` and per-row
`scale_rows`.

A `Tape` is single-threaded: build one per training step.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, ClassVar, Sequence

import numpy as np
from scipy.special import expit, log_softmax, softmax

from . import kernels
from .exceptions import ContractError, DimensionError, NotRegisteredError, NumericError


@dataclass(eq=False)
class Variable:
    """Trainable parameter: a value and a gradient of identical shape."""

    value: np.ndarray
    name: str = ""
    grad: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.value = np.array(self.value, dtype=np.float64, copy=True, order="C")
        self.grad = np.zeros_like(self.value)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.value)


@dataclass(frozen=True, eq=False)
class OpRecord:
    id: int
    kind: str
    inputs: tuple[int, ...]
    value: np.ndarray
    saved: dict[str, Any]
    requires_grad: bool
    variable: Variable | None = None


class Node:
    """Handle to one recorded value on a tape."""

    __slots__ = ("tape", "id")

    def __init__(self, tape: Tape, node_id: int) -> None:
        self.tape = tape
        self.id = node_id

    @property
    def value(self) -> np.ndarray:
        return self.tape.records[self.id].value

    @property
    def shape(self) -> tuple[int, ...]:
        return self.value.shape

    def __add__(self, other: Any) -> Node:
        return add(self, other)

    def __radd__(self, other: Any) -> Node:
        return add(other, self)

    def __sub__(self, other: Any) -> Node:
        return subtract(self, other)

    def __rsub__(self, other: Any) -> Node:
        return subtract(other, self)

    def __mul__(self, other: Any) -> Node:
        return multiply(self, other)

    def __rmul__(self, other: Any) -> Node:
        return multiply(other, self)

    def __matmul__(self, other: Any) -> Node:
        return matmul(self, other)

    def __repr__(self) -> str:
        return f"Node(id={self.id}, kind={self.tape.records[self.id].kind}, shape={self.shape})"


class Tape:
    """Append-only record of forward operations; ids are topologically ordered."""

    def __init__(self) -> None:
        self.records: list[OpRecord] = []
        self._watched: dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.records)

    def _append(
        self,
        kind: str,
        inputs: tuple[int, ...],
        value: np.ndarray,
        saved: dict[str, Any],
        requires_grad: bool,
        variable: Variable | None = None,
    ) -> Node:
        value = np.asarray(value, dtype=np.float64)
        value.flags.writeable = False
        rec = OpRecord(len(self.records), kind, inputs, value, saved, requires_grad, variable)
        self.records.append(rec)
        return Node(self, rec.id)

    def watch(self, variable: Variable) -> Node:
        """Register a parameter as a differentiable leaf (once per tape)."""
        key = id(variable)
        if key in self._watched:
            return Node(self, self._watched[key])
        node = self._append("variable", (), variable.value.copy(), {}, True, variable)
        self._watched[key] = node.id
        return node

    def constant(self, array: Any) -> Node:
        return self._append("constant", (), np.array(array, dtype=np.float64), {}, False)

    def apply(self, kind: str, inputs: Sequence[Node], **attrs: Any) -> Node:
        primitive = PRIMITIVES.get(kind)
        if primitive is None:
            raise NotRegisteredError("primitive", kind, sorted(PRIMITIVES))
        for node in inputs:
            if node.tape is not self:
                raise ContractError(f"{kind}: input node belongs to another tape")
        values = [node.value for node in inputs]
        out, saved = primitive.forward(values, **attrs)
        requires_grad = any(self.records[node.id].requires_grad for node in inputs)
        return self._append(kind, tuple(node.id for node in inputs), out, saved, requires_grad)


class Primitive(ABC):
    """Forward rule plus exact vector-Jacobian product."""

    kind: ClassVar[str]

    @abstractmethod
    def forward(self, values: list[np.ndarray], **attrs: Any) -> tuple[np.ndarray, dict]:
        ...

    @abstractmethod
    def backward(self, grad: np.ndarray, saved: dict[str, Any]) -> list[np.ndarray | None]:
        ...


def _same_shape(kind: str, a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"{kind}: shapes {a.shape} and {b.shape} differ", detail=kind)


def _matrix(kind: str, a: np.ndarray) -> None:
    if a.ndim != 2:
        raise DimensionError(f"{kind}: expected a matrix, got shape {a.shape}", detail=kind)


class Add(Primitive):
    kind = "add"

    def forward(self, values, **attrs):
        a, b = values
        _same_shape(self.kind, a, b)
        return a + b, {}

    def backward(self, grad, saved):
        return [grad, grad]


class Subtract(Primitive):
    kind = "subtract"

    def forward(self, values, **attrs):
        a, b = values
        _same_shape(self.kind, a, b)
        return a - b, {}

    def backward(self, grad, saved):
        return [grad, -grad]


class Multiply(Primitive):
    kind = "multiply"

    def forward(self, values, **attrs):
        a, b = values
        _same_shape(self.kind, a, b)
        return a * b, {"a": a, "b": b}

    def backward(self, grad, saved):
        return [grad * saved["b"], grad * saved["a"]]


class Scale(Primitive):
    kind = "scale"

    def forward(self, values, factor: float = 1.0, **attrs):
        return values[0] * factor, {"factor": float(factor)}

    def backward(self, grad, saved):
        return [grad * saved["factor"]]


class BiasAdd(Primitive):
    kind = "bias_add"

    def forward(self, values, **attrs):
        x, b = values
        _matrix(self.kind, x)
        if b.size != x.shape[1]:
            raise DimensionError(
                f"bias_add: bias of size {b.size} for width {x.shape[1]}", detail=self.kind
            )
        return x + b.reshape(1, -1), {"bias_shape": b.shape}

    def backward(self, grad, saved):
        return [grad, grad.sum(axis=0).reshape(saved["bias_shape"])]


class ScaleRows(Primitive):
    kind = "scale_rows"

    def forward(self, values, **attrs):
        x, w = values
        _matrix(self.kind, x)
        if w.shape != (x.shape[0], 1):
            raise DimensionError(
                f"scale_rows: weights {w.shape} for {x.shape[0]} rows", detail=self.kind
            )
        return x * w, {"x": x, "w": w}

    def backward(self, grad, saved):
        return [grad * saved["w"], (grad * saved["x"]).sum(axis=1, keepdims=True)]


class MatMul(Primitive):
    kind = "matmul"

    def forward(self, values, **attrs):
        a, b = values
        _matrix(self.kind, a)
        _matrix(self.kind, b)
        if a.shape[1] != b.shape[0]:
            raise DimensionError(f"matmul: {a.shape} @ {b.shape}", detail=self.kind)
        return a @ b, {"a": a, "b": b}

    def backward(self, grad, saved):
        return [grad @ saved["b"].T, saved["a"].T @ grad]


class Concat(Primitive):
    kind = "concat"

    def forward(self, values, **attrs):
        for v in values:
            _matrix(self.kind, v)
        rows = {v.shape[0] for v in values}
        if len(rows) > 1:
            raise DimensionError(f"concat: row counts {sorted(rows)} differ", detail=self.kind)
        widths = [v.shape[1] for v in values]
        return np.concatenate(values, axis=1), {"splits": np.cumsum(widths)[:-1]}

    def backward(self, grad, saved):
        return list(np.split(grad, saved["splits"], axis=1))


class SliceColumns(Primitive):
    kind = "slice_columns"

    def forward(self, values, start: int = 0, stop: int | None = None, **attrs):
        x = values[0]
        _matrix(self.kind, x)
        stop = x.shape[1] if stop is None else stop
        if not 0 <= start <= stop <= x.shape[1]:
            raise DimensionError(
                f"slice_columns: [{start}:{stop}] of width {x.shape[1]}", detail=self.kind
            )
        return x[:, start:stop], {"shape": x.shape, "start": start, "stop": stop}

    def backward(self, grad, saved):
        dx = np.zeros(saved["shape"])
        dx[:, saved["start"] : saved["stop"]] = grad
        return [dx]


class GatherRows(Primitive):
    kind = "gather_rows"

    def forward(self, values, indices: Any = None, **attrs):
        x = values[0]
        out = kernels.gather_rows(x, indices)
        return out, {"indices": np.asarray(indices, dtype=np.int64), "rows": x.shape[0]}

    def backward(self, grad, saved):
        return [kernels.segment_reduce(grad, saved["indices"], saved["rows"], "sum")]


class SegmentSum(Primitive):
    kind = "segment_sum"

    def forward(self, values, segment_ids: Any = None, num_segments: int = 0, **attrs):
        out = kernels.segment_reduce(values[0], segment_ids, num_segments, "sum")
        return out, {"ids": np.asarray(segment_ids, dtype=np.int64)}

    def backward(self, grad, saved):
        return [grad[saved["ids"]]]


class SegmentMean(Primitive):
    kind = "segment_mean"

    def forward(self, values, segment_ids: Any = None, num_segments: int = 0, **attrs):
        out = kernels.segment_reduce(values[0], segment_ids, num_segments, "mean")
        ids = np.asarray(segment_ids, dtype=np.int64)
        counts = kernels.segment_counts(ids, num_segments)
        return out, {"ids": ids, "counts": counts}

    def backward(self, grad, saved):
        ids = saved["ids"]
        return [grad[ids] / saved["counts"][ids][:, None]]


class SegmentMax(Primitive):
    """Gradient flows to the argmax row only; ties resolve to the lowest row index."""

    kind = "segment_max"

    def forward(self, values, segment_ids: Any = None, num_segments: int = 0, **attrs):
        x = values[0]
        out = kernels.segment_reduce(x, segment_ids, num_segments, "max")
        arg = kernels.segment_argmax(x, segment_ids, num_segments)
        return out, {"arg": arg, "shape": x.shape}

    def backward(self, grad, saved):
        arg = saved["arg"]
        dx = np.zeros(saved["shape"])
        seg, col = np.nonzero(arg >= 0)
        np.add.at(dx, (arg[seg, col], col), grad[seg, col])
        return [dx]


class SegmentSoftmax(Primitive):
    kind = "segment_softmax"

    def forward(self, values, segment_ids: Any = None, num_segments: int = 0, **attrs):
        out = kernels.segment_softmax(values[0], segment_ids, num_segments)
        return out, {
            "out": out,
            "ids": np.asarray(segment_ids, dtype=np.int64),
            "n": num_segments,
        }

    def backward(self, grad, saved):
        s, ids = saved["out"], saved["ids"]
        weighted = kernels.segment_reduce(grad * s, ids, saved["n"], "sum")
        return [s * (grad - weighted[ids])]


class Relu(Primitive):
    """relu'(0) is 0."""

    kind = "relu"

    def forward(self, values, **attrs):
        x = values[0]
        return np.maximum(x, 0.0), {"mask": x > 0}

    def backward(self, grad, saved):
        return [grad * saved["mask"]]


class Sigmoid(Primitive):
    kind = "sigmoid"

    def forward(self, values, **attrs):
        out = expit(values[0])
        return out, {"out": out}

    def backward(self, grad, saved):
        s = saved["out"]
        return [grad * s * (1.0 - s)]


class Tanh(Primitive):
    kind = "tanh"

    def forward(self, values, **attrs):
        out = np.tanh(values[0])
        return out, {"out": out}

    def backward(self, grad, saved):
        return [grad * (1.0 - saved["out"] ** 2)]


class Softplus(Primitive):
    kind = "softplus"

    def forward(self, values, **attrs):
        x = values[0]
        return np.logaddexp(0.0, x), {"x": x}

    def backward(self, grad, saved):
        return [grad * expit(saved["x"])]


class ShiftedSoftplus(Primitive):
    """ln(0.5 e^x + 0.5), zero at the origin."""

    kind = "shifted_softplus"

    def forward(self, values, **attrs):
        x = values[0]
        return np.logaddexp(0.0, x) - np.log(2.0), {"x": x}

    def backward(self, grad, saved):
        return [grad * expit(saved["x"])]


class Abs(Primitive):
    kind = "abs"

    def forward(self, values, **attrs):
        x = values[0]
        return np.abs(x), {"sign": np.sign(x)}

    def backward(self, grad, saved):
        return [grad * saved["sign"]]


class Square(Primitive):
    kind = "square"

    def forward(self, values, **attrs):
        x = values[0]
        return x * x, {"x": x}

    def backward(self, grad, saved):
        return [2.0 * saved["x"] * grad]


class SumAll(Primitive):
    kind = "sum_all"

    def forward(self, values, **attrs):
        x = values[0]
        return np.array([[x.sum()]]), {"shape": x.shape}

    def backward(self, grad, saved):
        return [np.full(saved["shape"], grad.reshape(-1)[0])]


class MeanAll(Primitive):
    """Mean over every entry; an empty input has mean 0."""

    kind = "mean_all"

    def forward(self, values, **attrs):
        x = values[0]
        mean = x.mean() if x.size else 0.0
        return np.array([[mean]]), {"shape": x.shape, "size": x.size}

    def backward(self, grad, saved):
        size = max(saved["size"], 1)
        return [np.full(saved["shape"], grad.reshape(-1)[0] / size)]


class RowSum(Primitive):
    kind = "row_sum"

    def forward(self, values, **attrs):
        x = values[0]
        _matrix(self.kind, x)
        return x.sum(axis=1, keepdims=True), {"shape": x.shape}

    def backward(self, grad, saved):
        return [np.broadcast_to(grad, saved["shape"]).copy()]


class Normalize(Primitive):
    """p / ||p||_2 over all entries."""

    kind = "normalize"

    def forward(self, values, **attrs):
        p = values[0]
        norm = float(np.linalg.norm(p))
        if norm == 0.0:
            raise ContractError("normalize: vector has zero norm", detail=self.kind)
        u = p / norm
        return u, {"u": u, "norm": norm}

    def backward(self, grad, saved):
        u = saved["u"]
        return [(grad - u * np.sum(u * grad)) / saved["norm"]]


class SoftmaxCrossEntropy(Primitive):
    """Per-row ``logsumexp(logits) - logits[label]`` as an ``(R, 1)`` column."""

    kind = "softmax_cross_entropy"

    def forward(self, values, labels: Any = None, **attrs):
        logits = values[0]
        _matrix(self.kind, logits)
        labels = np.asarray(labels, dtype=np.int64).reshape(-1)
        if labels.shape[0] != logits.shape[0]:
            raise DimensionError(
                f"{labels.shape[0]} labels for {logits.shape[0]} rows", detail=self.kind
            )
        if labels.size and (labels.min() < 0 or labels.max() >= logits.shape[1]):
            raise DimensionError(
                f"labels must lie in [0, {logits.shape[1]})", detail=self.kind
            )
        rows = np.arange(labels.shape[0])
        loss = -log_softmax(logits, axis=1)[rows, labels]
        return loss.reshape(-1, 1), {"probs": softmax(logits, axis=1), "labels": labels}

    def backward(self, grad, saved):
        dx = saved["probs"].copy()
        dx[np.arange(dx.shape[0]), saved["labels"]] -= 1.0
        return [dx * grad]


PRIMITIVES: dict[str, Primitive] = {
    cls.kind: cls()
    for cls in (
        Add,
        Subtract,
        Multiply,
        Scale,
        BiasAdd,
        ScaleRows,
        MatMul,
        Concat,
        SliceColumns,
        GatherRows,
        SegmentSum,
        SegmentMean,
        SegmentMax,
        SegmentSoftmax,
        Relu,
        Sigmoid,
        Tanh,
        Softplus,
        ShiftedSoftplus,
        Abs,
        Square,
        SumAll,
        MeanAll,
        RowSum,
        Normalize,
        SoftmaxCrossEntropy,
    )
}


def _tape_of(*args: Any) -> Tape:
    for arg in args:
        if isinstance(arg, Node):
            return arg.tape
    raise ContractError("at least one operand must be a tape node")


def _nodes(tape: Tape, *args: Any) -> list[Node]:
    return [arg if isinstance(arg, Node) else tape.constant(arg) for arg in args]


def _unary(kind: str, x: Node, **attrs: Any) -> Node:
    return x.tape.apply(kind, [x], **attrs)


def _binary(kind: str, a: Any, b: Any) -> Node:
    tape = _tape_of(a, b)
    return tape.apply(kind, _nodes(tape, a, b))


def add(a: Any, b: Any) -> Node:
    return _binary("add", a, b)


def subtract(a: Any, b: Any) -> Node:
    return _binary("subtract", a, b)


def multiply(a: Any, b: Any) -> Node:
    return _binary("multiply", a, b)


def matmul(a: Any, b: Any) -> Node:
    return _binary("matmul", a, b)


def bias_add(x: Any, b: Any) -> Node:
    return _binary("bias_add", x, b)


def scale_rows(x: Any, w: Any) -> Node:
    return _binary("scale_rows", x, w)


def scale(x: Node, factor: float) -> Node:
    return _unary("scale", x, factor=factor)


def concat(xs: Sequence[Any]) -> Node:
    tape = _tape_of(*xs)
    nodes = _nodes(tape, *xs)
    if len(nodes) == 1:
        return nodes[0]
    return tape.apply("concat", nodes)


def slice_columns(x: Node, start: int, stop: int | None = None) -> Node:
    return _unary("slice_columns", x, start=start, stop=stop)


def gather_rows(x: Node, indices: Any) -> Node:
    return _unary("gather_rows", x, indices=indices)


def segment_reduce(x: Node, segment_ids: Any, num_segments: int, reducer: str = "sum") -> Node:
    if reducer not in kernels.REDUCERS:
        raise NotRegisteredError("reducer", reducer, list(kernels.REDUCERS))
    return _unary(
        f"segment_{reducer}", x, segment_ids=segment_ids, num_segments=num_segments
    )


def segment_sum(x: Node, segment_ids: Any, num_segments: int) -> Node:
    return segment_reduce(x, segment_ids, num_segments, "sum")


def segment_mean(x: Node, segment_ids: Any, num_segments: int) -> Node:
    return segment_reduce(x, segment_ids, num_segments, "mean")


def segment_max(x: Node, segment_ids: Any, num_segments: int) -> Node:
    return segment_reduce(x, segment_ids, num_segments, "max")


def segment_softmax(x: Node, segment_ids: Any, num_segments: int) -> Node:
    return _unary("segment_softmax", x, segment_ids=segment_ids, num_segments=num_segments)


def relu(x: Node) -> Node:
    return _unary("relu", x)


def sigmoid(x: Node) -> Node:
    return _unary("sigmoid", x)


def tanh(x: Node) -> Node:
    return _unary("tanh", x)


def softplus(x: Node) -> Node:
    return _unary("softplus", x)


def shifted_softplus(x: Node) -> Node:
    return _unary("shifted_softplus", x)


def absolute(x: Node) -> Node:
    return _unary("abs", x)


def square(x: Node) -> Node:
    return _unary("square", x)


def sum_all(x: Node) -> Node:
    return _unary("sum_all", x)


def mean_all(x: Node) -> Node:
    return _unary("mean_all", x)


def row_sum(x: Node) -> Node:
    return _unary("row_sum", x)


def normalize(x: Node) -> Node:
    return _unary("normalize", x)


def softmax_cross_entropy(logits: Node, labels: Any) -> Node:
    return _unary("softmax_cross_entropy", logits, labels=labels)


def backward(tape: Tape, scalar_output: Node | int) -> dict[int, np.ndarray]:
    """Propagate d(output)/d(node) through the tape in reverse order.

    Gradients accumulate additively over fan-out. Watched variables receive
    their total gradient added into ``Variable.grad``.

    Raises:
        ContractError: if the seed is not a single value.
    """
    out_id = scalar_output.id if isinstance(scalar_output, Node) else int(scalar_output)
    seed = tape.records[out_id].value
    if seed.size != 1:
        raise ContractError(f"backward needs a scalar output, got shape {seed.shape}")

    grads: dict[int, np.ndarray] = {out_id: np.ones_like(seed)}
    for rec in reversed(tape.records[: out_id + 1]):
        grad = grads.get(rec.id)
        if grad is None or not rec.inputs or not rec.requires_grad:
            continue
        input_grads = PRIMITIVES[rec.kind].backward(grad, rec.saved)
        for input_id, input_grad in zip(rec.inputs, input_grads):
            if input_grad is None or not tape.records[input_id].requires_grad:
                continue
            if input_id in grads:
                grads[input_id] = grads[input_id] + input_grad
            else:
                grads[input_id] = input_grad

    for rec in tape.records:
        if rec.variable is not None and rec.id in grads:
            rec.variable.grad += grads[rec.id].reshape(rec.variable.shape)
    return grads


def _evaluate(f: Callable[[Tape], Node]) -> float:
    value = f(Tape()).value
    if value.size != 1:
        raise ContractError(f"grad_check needs a scalar function, got shape {value.shape}")
    scalar = float(value.reshape(-1)[0])
    if not np.isfinite(scalar):
        raise NumericError(f"function evaluated to {scalar}")
    return scalar


def grad_check(
    f: Callable[[Tape], Node], params: Sequence[Variable], eps: float = 1e-5
) -> float:
    """Largest relative error between backward() and central differences.

    ``f`` receives a fresh tape, watches whichever parameters it uses and
    returns a scalar node. Relative error is ``|a - n| / max(|a|, |n|, 1e-8)``.
    Relu, abs and max are not differentiable at their kinks; pass inputs
    through `away_from_kinks` first.
    """
    tape = Tape()
    out = f(tape)
    for p in params:
        p.zero_grad()
    backward(tape, out)
    analytic = [p.grad.copy() for p in params]

    worst = 0.0
    for p, grad in zip(params, analytic):
        if not np.all(np.isfinite(grad)):
            raise NumericError(f"non-finite analytic gradient for {p.name or 'parameter'}")
        flat = p.value.reshape(-1)
        for k in range(flat.size):
            original = flat[k]
            flat[k] = original + eps
            f_plus = _evaluate(f)
            flat[k] = original - eps
            f_minus = _evaluate(f)
            flat[k] = original
            numeric = (f_plus - f_minus) / (2.0 * eps)
            a = float(grad.reshape(-1)[k])
            err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-8)
            worst = max(worst, err)
    return worst


def away_from_kinks(array: Any, margin: float = 1e-2) -> np.ndarray:
    """Push entries within ``margin`` of zero out to ``±margin``."""
    out = np.array(array, dtype=np.float64, copy=True)
    near = np.abs(out) < margin
    out[near] = np.where(out[near] >= 0, margin, -margin)
    return out
