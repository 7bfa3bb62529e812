"""Pydantic schemas for model specs, run configs and dataset lines."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Optional, TypeVar

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .exceptions import ConfigError

Task = Literal["node_classification", "graph_classification", "graph_regression"]
Readout = Literal["sum", "mean", "max", "set2set"]
Activation = Literal["linear", "relu", "sigmoid", "tanh", "softplus", "shifted_softplus"]

DEFAULT_READOUTS: dict[str, str] = {
    "gcn": "mean",
    "interaction": "sum",
    "mpn": "set2set",
    "schnet": "sum",
    "megnet": "mean",
    "unet": "mean",
}

SchemaT = TypeVar("SchemaT", bound=BaseModel)


# --- Model Spec ---


class Widths(BaseModel):
    """Feature widths. ``None`` means "take it from the dataset"."""

    model_config = ConfigDict(extra="forbid")

    node: Optional[int] = Field(None, ge=1)
    edge: Optional[int] = Field(None, ge=0)
    state: Optional[int] = Field(None, ge=0)
    output: Optional[int] = Field(None, ge=1)
    mlp: int = Field(32, ge=1, description="Hidden width of the MLPs inside message functions")


class BasisSpec(BaseModel):
    """Gaussian distance expansion used for position-bearing data."""

    model_config = ConfigDict(extra="forbid")

    num: int = Field(20, ge=1)
    gamma: float = Field(10.0, gt=0)
    r_max: float = Field(4.0, gt=0)
    cutoff: float = Field(5.0, gt=0)


class ModelSpec(BaseModel):
    """Declarative description of one of the model architectures."""

    model_config = ConfigDict(extra="forbid")

    model: str
    task: Task
    layers: list[int] = Field(default_factory=lambda: [32, 32])
    widths: Widths = Field(default_factory=Widths)
    readout: Optional[Readout] = None
    activation: Activation = "relu"
    update: Literal["gru", "mlp"] = "gru"
    steps: int = Field(3, ge=1)
    shared_weights: bool = True
    set2set_steps: int = Field(3, ge=1)
    pool_ratio: float = Field(0.5, gt=0, le=1)
    pool_levels: int = Field(2, ge=1)
    seed: int = 0
    basis: BasisSpec = Field(default_factory=BasisSpec)

    @model_validator(mode="after")
    def _check_layers(self) -> ModelSpec:
        for i, width in enumerate(self.layers):
            if width < 1:
                raise ValueError(f"layers[{i}] must be >= 1, got {width}")
        if not self.layers:
            raise ValueError("layers must list at least one hidden width")
        return self

    @property
    def resolved_readout(self) -> str:
        return self.readout or DEFAULT_READOUTS.get(self.model, "mean")

    @property
    def is_node_task(self) -> bool:
        return self.task == "node_classification"

    def with_dataset(self, dataset: DatasetSpec) -> ModelSpec:
        """Fill unset widths from the dataset and reject contradictions."""
        if self.task != dataset.task:
            raise ConfigError(
                f"model task {self.task} does not match dataset task {dataset.task}",
                detail="task",
            )
        resolved = {
            "node": dataset.node_width,
            "edge": dataset.edge_width,
            "state": dataset.state_width,
            "output": dataset.output_width,
        }
        update: dict[str, Any] = {}
        for name, data_value in resolved.items():
            declared = getattr(self.widths, name)
            if declared is None:
                update[name] = data_value
            elif data_value is not None and declared != data_value:
                raise ConfigError(
                    f"widths.{name} is {declared} but the dataset has {data_value}",
                    detail=f"widths.{name}",
                )
        return self.model_copy(update={"widths": self.widths.model_copy(update=update)})


# --- Dataset ---


class DatasetSpec(BaseModel):
    """Summary of a loaded dataset, shared by every record in it."""

    task: Task
    target_names: list[str] = Field(default_factory=list)
    num_classes: Optional[int] = None
    num_targets: Optional[int] = None
    node_width: int
    edge_width: Optional[int] = None
    state_width: Optional[int] = None
    label_names: list[str] = Field(default_factory=list)

    @property
    def output_width(self) -> int:
        if self.task == "graph_regression":
            return int(self.num_targets or 0)
        return int(self.num_classes or 0)


class GraphLine(BaseModel):
    """One line of the JSONL graph format."""

    model_config = ConfigDict(extra="forbid")

    id: str
    nodes: list[list[float]]
    edges: list[tuple[int, int]] = Field(default_factory=list)
    edge_features: Optional[list[list[float]]] = None
    positions: Optional[list[tuple[float, float, float]]] = None
    state: Optional[list[float]] = None
    targets: Optional[list[float]] = None
    label: Optional[int] = None
    node_labels: Optional[list[int]] = None
    target_names: Optional[list[str]] = None

    @model_validator(mode="after")
    def _one_supervision(self) -> GraphLine:
        given = [k for k in ("targets", "label", "node_labels") if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValueError(
                "exactly one of targets / label / node_labels is required, "
                f"got {given or 'none'}"
            )
        return self


# --- Run Config ---


class OptimizerConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["adam", "sgd"] = "adam"
    lr: float = Field(1e-3, ge=0)
    beta1: float = Field(0.9, ge=0, lt=1)
    beta2: float = Field(0.999, ge=0, lt=1)
    epsilon: float = Field(1e-8, gt=0)


class DatasetConfig(BaseModel):
    """Where the data lives and how to split it."""

    model_config = ConfigDict(extra="forbid")

    format: Literal["jsonl", "citation"] = "jsonl"
    path: Optional[str] = None
    nodes: Optional[str] = None
    edges: Optional[str] = None
    cutoff: Optional[float] = Field(None, gt=0)
    target_names: Optional[list[str]] = None
    split: tuple[float, float, float] = (0.8, 0.1, 0.1)

    @model_validator(mode="after")
    def _paths_for_format(self) -> DatasetConfig:
        if self.format == "jsonl" and not self.path:
            raise ValueError("dataset.path is required for the jsonl format")
        if self.format == "citation" and not (self.nodes and self.edges):
            raise ValueError("dataset.nodes and dataset.edges are required for citation data")
        return self


class RunConfig(BaseModel):
    """Everything `raggednn train` needs. Relative paths resolve against the config file."""

    model_config = ConfigDict(extra="forbid")

    model_spec: str | ModelSpec
    dataset: DatasetConfig
    task: Optional[Task] = None
    loss: Optional[Literal["mae", "mse", "softmax_ce"]] = None
    seed: Optional[int] = None
    batch_size: int = Field(32, ge=1)
    epochs: int = Field(100, ge=0)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    output_dir: str = "runs/default"
    threads: Optional[int] = Field(None, ge=1)

    def resolve_paths(self, base: Path) -> RunConfig:
        """Anchor relative paths at ``base`` and check the inputs exist."""

        def anchor(value: str | None, field: str) -> str | None:
            if value is None:
                return None
            path = Path(value)
            if not path.is_absolute():
                path = base / path
            if not path.exists():
                raise ConfigError(f"{field}: path does not exist: {path}", detail=str(path))
            return str(path)

        dataset = self.dataset.model_copy(
            update={
                "path": anchor(self.dataset.path, "dataset.path"),
                "nodes": anchor(self.dataset.nodes, "dataset.nodes"),
                "edges": anchor(self.dataset.edges, "dataset.edges"),
            }
        )
        model_spec = self.model_spec
        if isinstance(model_spec, str):
            model_spec = anchor(model_spec, "model_spec") or model_spec
        output_dir = Path(self.output_dir)
        if not output_dir.is_absolute():
            output_dir = base / output_dir
        return self.model_copy(
            update={"dataset": dataset, "model_spec": model_spec, "output_dir": str(output_dir)}
        )


# --- Loading ---


def read_document(path: str | Path) -> Any:
    """Parse a JSON or YAML document chosen by file suffix."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"file does not exist: {path}", detail=str(path))
    text = path.read_text(encoding="utf-8")
    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            return yaml.safe_load(text)
        return json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot parse {path}: {e}", detail=str(path)) from e


def _field_name(error: dict[str, Any]) -> str:
    return ".".join(str(part) for part in error.get("loc", ())) or "<root>"


def parse_schema(cls: type[SchemaT], data: Any, source: str = "") -> SchemaT:
    """Validate ``data`` into ``cls``, turning validation failures into ConfigError."""
    try:
        return cls.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        field = _field_name(first)
        where = f"{source}: " if source else ""
        raise ConfigError(f"{where}{field}: {first['msg']}", detail=field) from e


def load_model_spec(path: str | Path) -> ModelSpec:
    return parse_schema(ModelSpec, read_document(path), str(path))


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    config = parse_schema(RunConfig, read_document(path), str(path))
    return config.resolve_paths(path.parent)
