"""Tests for Phase 0: exceptions, settings, logging and config documents."""

from __future__ import annotations

import io
import json

import pytest

from raggednn.config import AppSettings, get_settings
from raggednn.exceptions import (
    CheckpointError,
    ConfigError,
    ContractError,
    DataFormatError,
    DimensionError,
    GraphValidationError,
    NotRegisteredError,
    NumericError,
    RaggedNNError,
)
from raggednn.log import get_logger, setup_logging
from raggednn.schemas import (
    DatasetSpec,
    ModelSpec,
    RunConfig,
    load_model_spec,
    load_run_config,
    parse_schema,
    read_document,
)


# --- Exception tests ---


class TestExceptions:
    def test_hierarchy(self):
        """All custom exceptions inherit from RaggedNNError."""
        for exc_cls in (
            DimensionError,
            GraphValidationError,
            ContractError,
            NumericError,
            ConfigError,
            CheckpointError,
            DataFormatError,
            NotRegisteredError,
        ):
            assert issubclass(exc_cls, RaggedNNError)

    def test_base_error_fields(self):
        err = RaggedNNError(message="boom", detail="ctx")
        assert err.message == "boom"
        assert err.detail == "ctx"
        assert str(err) == "boom"

    def test_data_format_error_names_line(self):
        err = DataFormatError(7, "invalid JSON")
        assert err.line == 7
        assert err.reason == "invalid JSON"
        assert err.message == "line 7: invalid JSON"
        assert err.detail == "7"

    def test_not_registered_lists_names(self):
        err = NotRegisteredError("layer", "gat", available=["gcn", "mpn"])
        assert "gat" in str(err)
        assert "gcn, mpn" in err.message
        assert err.name == "gat"

    def test_not_registered_without_names(self):
        err = NotRegisteredError("kernel", "fft")
        assert "none" in err.message

    def test_catch_base(self):
        with pytest.raises(RaggedNNError):
            raise NumericError("nan in gradient")


# --- Settings tests ---


class TestSettings:
    def test_defaults(self, monkeypatch, tmp_path):
        for name in ("RAGGEDNN_SEED", "RAGGEDNN_LOG_LEVEL", "RAGGEDNN_THREADS"):
            monkeypatch.delenv(name, raising=False)
        monkeypatch.chdir(tmp_path)
        cfg = AppSettings()
        assert cfg.seed == 0
        assert cfg.log_level == "INFO"
        assert cfg.threads == 1

    def test_env_override(self, mock_env):
        cfg = AppSettings()
        assert cfg.seed == 7
        assert cfg.log_level == "DEBUG"
        assert cfg.threads == 2

    def test_get_settings(self, mock_env):
        cfg = get_settings()
        assert isinstance(cfg, AppSettings)
        assert cfg.seed == 7

    def test_dotenv_file(self, tmp_path, monkeypatch):
        monkeypatch.delenv("RAGGEDNN_SEED", raising=False)
        (tmp_path / ".env").write_text("RAGGEDNN_SEED=11\n", encoding="utf-8")
        monkeypatch.chdir(tmp_path)
        assert AppSettings().seed == 11


# --- Logging tests ---


class TestLogging:
    def test_setup_logging_no_crash(self):
        setup_logging(level="DEBUG", json_output=True)
        setup_logging(level="INFO", json_output=False)

    def test_get_logger(self):
        setup_logging()
        log = get_logger("test")
        assert log is not None

    def test_json_lines_go_to_stream(self):
        stream = io.StringIO()
        setup_logging(level="INFO", json_output=True, stream=stream)
        get_logger("test").info("epoch_completed", epoch=3, loss=0.25)
        line = json.loads(stream.getvalue().strip().splitlines()[-1])
        assert line["event"] == "epoch_completed"
        assert line["epoch"] == 3
        assert line["level"] == "info"


# --- Config document tests ---


class TestConfigDocuments:
    def test_model_spec_defaults(self):
        spec = ModelSpec(model="mpn", task="graph_classification")
        assert spec.layers == [32, 32]
        assert spec.steps == 3
        assert spec.shared_weights is True
        assert spec.resolved_readout == "set2set"

    def test_default_readouts(self):
        expected = {
            "gcn": "mean",
            "interaction": "sum",
            "mpn": "set2set",
            "schnet": "sum",
            "megnet": "mean",
            "unet": "mean",
        }
        for model, readout in expected.items():
            spec = ModelSpec(model=model, task="graph_regression")
            assert spec.resolved_readout == readout

    def test_zero_width_layer_rejected(self):
        with pytest.raises(ConfigError, match="layers"):
            parse_schema(ModelSpec, {"model": "gcn", "task": "node_classification", "layers": [0]})

    def test_unknown_field_named(self):
        with pytest.raises(ConfigError) as info:
            parse_schema(ModelSpec, {"model": "gcn", "task": "graph_regression", "depth": 3})
        assert info.value.detail == "depth"

    def test_with_dataset_fills_widths(self):
        data = DatasetSpec(task="graph_regression", num_targets=3, node_width=5, edge_width=2)
        spec = ModelSpec(model="schnet", task="graph_regression").with_dataset(data)
        assert spec.widths.node == 5
        assert spec.widths.edge == 2
        assert spec.widths.output == 3

    def test_with_dataset_rejects_task_mismatch(self):
        data = DatasetSpec(task="graph_classification", num_classes=2, node_width=5)
        with pytest.raises(ConfigError, match="task"):
            ModelSpec(model="gcn", task="graph_regression").with_dataset(data)

    def test_with_dataset_rejects_width_conflict(self):
        data = DatasetSpec(task="graph_classification", num_classes=2, node_width=5)
        spec = ModelSpec(model="gcn", task="graph_classification", widths={"node": 4})
        with pytest.raises(ConfigError, match="widths.node"):
            spec.with_dataset(data)

    def test_read_yaml_and_json(self, tmp_path):
        (tmp_path / "m.yaml").write_text("model: gcn\ntask: node_classification\n")
        (tmp_path / "m.json").write_text('{"model": "gcn", "task": "node_classification"}')
        assert load_model_spec(tmp_path / "m.yaml") == load_model_spec(tmp_path / "m.json")

    def test_unparseable_document(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="cannot parse"):
            read_document(path)

    def test_run_config_missing_path_names_it(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(
            json.dumps(
                {
                    "model_spec": {"model": "mpn", "task": "graph_classification"},
                    "dataset": {"format": "jsonl", "path": "missing.jsonl"},
                }
            )
        )
        with pytest.raises(ConfigError) as info:
            load_run_config(path)
        assert "missing.jsonl" in info.value.message

    def test_run_config_resolves_relative_paths(self, tmp_path, tmp_jsonl):
        path = tmp_path / "run.yaml"
        path.write_text(
            "model_spec: {model: mpn, task: graph_classification}\n"
            f"dataset: {{format: jsonl, path: {tmp_jsonl.name}}}\n"
            "output_dir: out\n"
        )
        config = load_run_config(path)
        assert isinstance(config, RunConfig)
        assert config.dataset.path == str(tmp_jsonl)
        assert config.output_dir == str(tmp_path / "out")
        assert config.batch_size == 32

    def test_citation_format_needs_both_files(self):
        with pytest.raises(ConfigError, match="dataset"):
            parse_schema(
                RunConfig,
                {
                    "model_spec": "m.json",
                    "dataset": {"format": "citation", "nodes": "a.content"},
                },
            )
