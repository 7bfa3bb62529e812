"""JSONL graph datasets: one graph object per line."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Sequence

from pydantic import ValidationError

from ..exceptions import ConfigError, DataFormatError, DimensionError, GraphValidationError
from ..schemas import DatasetSpec, GraphLine
from .base import DatasetSource
from .records import GraphRecord, infer_dataset_spec


def _record_from_line(line: GraphLine) -> GraphRecord:
    return GraphRecord(
        id=line.id,
        node_features=line.nodes,
        edge_index=line.edges,
        edge_features=line.edge_features,
        targets=line.targets,
        label=line.label,
        node_labels=line.node_labels,
        state=line.state,
        positions=line.positions,
    )


def load_jsonl_dataset(path: str | Path) -> tuple[DatasetSpec, list[GraphRecord]]:
    """Parse and validate a JSONL graph file, preserving line order.

    Blank lines are skipped. An optional ``target_names`` key names the
    regression targets and must agree across lines.

    Raises:
        DataFormatError: for any malformed line, naming its 1-based number.
        ConfigError: if the file is missing or holds no graphs.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"path does not exist: {path}", detail=str(path))

    records: list[GraphRecord] = []
    line_numbers: list[int] = []
    target_names: list[str] | None = None
    with path.open(encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            text = raw.strip()
            if not text:
                continue
            try:
                data = json.loads(text)
            except json.JSONDecodeError as e:
                raise DataFormatError(lineno, f"invalid JSON ({e.msg})") from e
            try:
                line = GraphLine.model_validate(data)
            except ValidationError as e:
                first = e.errors()[0]
                field = ".".join(str(p) for p in first.get("loc", ())) or "<line>"
                raise DataFormatError(lineno, f"{field}: {first['msg']}") from e
            if line.target_names is not None:
                if target_names is None:
                    target_names = line.target_names
                elif line.target_names != target_names:
                    raise DataFormatError(lineno, "target_names differ from earlier lines")
            try:
                records.append(_record_from_line(line))
            except (GraphValidationError, DimensionError) as e:
                raise DataFormatError(lineno, e.message) from e
            line_numbers.append(lineno)

    if not records:
        raise ConfigError(f"{path}: no graphs", detail=str(path))
    try:
        spec = infer_dataset_spec(records, target_names)
    except DataFormatError as e:
        raise DataFormatError(line_numbers[e.line - 1], e.reason) from e
    return spec, records


def record_to_line(
    record: GraphRecord, target_names: Sequence[str] | None = None
) -> dict[str, Any]:
    """Canonical JSON object for one record."""
    obj: dict[str, Any] = {
        "id": record.id,
        "nodes": record.node_features.tolist(),
        "edges": record.edge_index.tolist(),
    }
    if record.edge_features is not None:
        obj["edge_features"] = record.edge_features.tolist()
    if record.positions is not None:
        obj["positions"] = record.positions.tolist()
    if record.state is not None:
        obj["state"] = record.state.tolist()
    if record.targets is not None:
        obj["targets"] = record.targets.tolist()
        if target_names:
            obj["target_names"] = list(target_names)
    elif record.label is not None:
        obj["label"] = record.label
    else:
        obj["node_labels"] = record.node_labels.tolist()
    return obj


def dump_jsonl_dataset(
    records: Sequence[GraphRecord],
    path: str | Path,
    target_names: Sequence[str] | None = None,
) -> Path:
    """Write records in the canonical JSONL schema; floats round-trip exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record_to_line(record, target_names)) + "\n")
    return path


class JsonlSource(DatasetSource):
    """Dataset stored as one JSON graph object per line."""

    path_keys = ("path",)

    def load(self) -> tuple[DatasetSpec, list[GraphRecord]]:
        return load_jsonl_dataset(self.config["path"])
