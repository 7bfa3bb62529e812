"""Checkpoint files: one JSON document with base64 float64 arrays."""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

import numpy as np
from pydantic import ValidationError

from ..exceptions import CheckpointError
from ..models import GraphModel, build_model
from ..schemas import DatasetSpec, ModelSpec
from .optim import OptimizerState

FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (1,)


@dataclass
class Checkpoint:
    """Everything needed to rebuild a model bit-for-bit and resume its optimizer."""

    model_spec: ModelSpec
    parameters: dict[str, np.ndarray]
    optimizer: Optional[OptimizerState] = None
    rng_state: Optional[dict[str, Any]] = None
    batch_size: int = 32
    dataset: Optional[DatasetSpec] = None
    format_version: int = FORMAT_VERSION

    @classmethod
    def from_model(
        cls,
        model: GraphModel,
        optimizer: OptimizerState | None = None,
        rng: np.random.Generator | None = None,
        batch_size: int = 32,
        dataset: DatasetSpec | None = None,
    ) -> Checkpoint:
        return cls(
            model_spec=model.spec,
            parameters={name: var.value.copy() for name, var in model.named_parameters()},
            optimizer=optimizer,
            rng_state=None if rng is None else rng.bit_generator.state,
            batch_size=batch_size,
            dataset=dataset,
        )

    def restore_model(self) -> GraphModel:
        """Build the architecture and load every stored parameter into it."""
        model = build_model(self.model_spec)
        named = dict(model.named_parameters())
        missing = sorted(set(named) - set(self.parameters))
        unexpected = sorted(set(self.parameters) - set(named))
        if missing or unexpected:
            raise CheckpointError(
                f"parameter names do not match the model (missing {missing}, "
                f"unexpected {unexpected})"
            )
        for name, var in named.items():
            stored = self.parameters[name]
            if stored.shape != var.shape:
                raise CheckpointError(
                    f"parameter {name} has shape {stored.shape}, model expects {var.shape}",
                    detail=name,
                )
            var.value[...] = stored
        return model


def _encode_array(name: str, array: np.ndarray) -> dict[str, Any]:
    data = np.ascontiguousarray(array, dtype="<f8").tobytes()
    return {"name": name, "shape": list(array.shape), "data": base64.b64encode(data).decode()}


def _decode_array(entry: dict[str, Any]) -> tuple[str, np.ndarray]:
    name = entry.get("name", "?")
    try:
        shape = tuple(int(s) for s in entry["shape"])
        raw = base64.b64decode(entry["data"], validate=True)
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointError(f"array {name} is malformed: {e}", detail=name) from e
    expected = int(np.prod(shape)) * 8
    if len(raw) != expected:
        raise CheckpointError(
            f"unexpected end of checkpoint: array {name} has {len(raw)} of {expected} bytes",
            detail=name,
        )
    return name, np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)


def _encode_optimizer(state: OptimizerState) -> dict[str, Any]:
    return {
        "kind": state.kind,
        "lr": state.lr,
        "beta1": state.beta1,
        "beta2": state.beta2,
        "epsilon": state.epsilon,
        "step": state.step,
        "m": [_encode_array(name, arr) for name, arr in state.m.items()],
        "v": [_encode_array(name, arr) for name, arr in state.v.items()],
    }


def _decode_optimizer(doc: dict[str, Any]) -> OptimizerState:
    return OptimizerState(
        kind=doc["kind"],
        lr=float(doc["lr"]),
        beta1=float(doc["beta1"]),
        beta2=float(doc["beta2"]),
        epsilon=float(doc["epsilon"]),
        step=int(doc["step"]),
        m=dict(_decode_array(e) for e in doc.get("m", [])),
        v=dict(_decode_array(e) for e in doc.get("v", [])),
    )


def save_checkpoint(path: str | Path, ckpt: Checkpoint) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "format_version": ckpt.format_version,
        "model_spec": ckpt.model_spec.model_dump(mode="json"),
        "dataset": None if ckpt.dataset is None else ckpt.dataset.model_dump(mode="json"),
        "batch_size": ckpt.batch_size,
        "rng_state": ckpt.rng_state,
        "optimizer": None if ckpt.optimizer is None else _encode_optimizer(ckpt.optimizer),
        "parameters": [_encode_array(name, arr) for name, arr in ckpt.parameters.items()],
    }
    path.write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")
    return path


def load_checkpoint(path: str | Path) -> Checkpoint:
    """Read a checkpoint written by `save_checkpoint`.

    Raises:
        CheckpointError: for a missing, truncated or corrupt file, or an
            unsupported ``format_version``.
    """
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"checkpoint not found: {path}", detail=str(path))
    text = path.read_text(encoding="utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        if not text.rstrip().endswith("}"):
            raise CheckpointError("unexpected end of checkpoint", detail=str(path)) from e
        raise CheckpointError(f"corrupt checkpoint: {e.msg}", detail=str(path)) from e
    if not isinstance(doc, dict):
        raise CheckpointError("corrupt checkpoint: top level is not an object", detail=str(path))

    version = doc.get("format_version")
    if version not in SUPPORTED_VERSIONS:
        supported = ", ".join(str(v) for v in SUPPORTED_VERSIONS)
        raise CheckpointError(
            f"unsupported checkpoint format_version {version}; supported versions: {supported}",
            detail=str(version),
        )
    try:
        model_spec = ModelSpec.model_validate(doc["model_spec"])
        dataset = None if doc.get("dataset") is None else DatasetSpec.model_validate(doc["dataset"])
        optimizer = None if doc.get("optimizer") is None else _decode_optimizer(doc["optimizer"])
        parameters = dict(_decode_array(e) for e in doc["parameters"])
        batch_size = int(doc["batch_size"])
    except (KeyError, TypeError, ValueError, ValidationError) as e:
        raise CheckpointError(f"corrupt checkpoint: {e}", detail=str(path)) from e
    return Checkpoint(
        model_spec=model_spec,
        parameters=parameters,
        optimizer=optimizer,
        rng_state=doc.get("rng_state"),
        batch_size=batch_size,
        dataset=dataset,
        format_version=version,
    )
