"""Command-line entry point: train, eval, gradcheck, convert and bench.

Results go to stdout as JSON or CSV; logs and error messages go to stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
import pandas as pd

from . import kernels
from .config import AppSettings, get_settings
from .datasets import (
    GraphRecord,
    SourceRegistry,
    batch_graphs,
    dump_jsonl_dataset,
    expand_distances,
    infer_dataset_spec,
    load_jsonl_dataset,
    representation_report,
    select_targets,
    split_dataset,
    split_node_labels,
)
from .diagnostics import GRADCHECK_CASES, run_gradcheck
from .exceptions import (
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
from .log import get_logger, setup_logging
from .models import GraphModel, build_model
from .schemas import BasisSpec, DatasetSpec, ModelSpec, load_model_spec, load_run_config
from .train import (
    TASK_LOSSES,
    Checkpoint,
    OptimizerState,
    evaluate,
    fit,
    load_checkpoint,
    make_optimizer,
    save_checkpoint,
)

logger = get_logger(__name__)

# Map exception types to process exit codes
_EXIT_CODE_MAP: dict[type[RaggedNNError], int] = {
    DimensionError: 1,
    GraphValidationError: 2,
    ContractError: 1,
    NumericError: 1,
    ConfigError: 2,
    DataFormatError: 2,
    CheckpointError: 2,
    NotRegisteredError: 2,
}

GRADCHECK_TOLERANCE = 1e-4


def exit_code_for(exc: RaggedNNError) -> int:
    for cls in type(exc).__mro__:
        if cls in _EXIT_CODE_MAP:
            return _EXIT_CODE_MAP[cls]
    return 1


def _resolve_seed(cli_seed: int | None, config_seed: int | None, settings: AppSettings) -> int:
    if cli_seed is not None:
        return cli_seed
    if config_seed is not None:
        return config_seed
    return settings.seed


def _featurize(
    records: list[GraphRecord], cutoff: float | None, basis: BasisSpec | None
) -> list[GraphRecord]:
    if cutoff is None:
        return records
    return [expand_distances(r, cutoff, basis) for r in records]


def _write_csv(frame: pd.DataFrame) -> None:
    frame.to_csv(sys.stdout, index=False, lineterminator="\n")


# --- train ---


def cmd_train(args: argparse.Namespace, settings: AppSettings) -> int:
    config = load_run_config(args.config)
    seed = _resolve_seed(args.seed, config.seed, settings)
    epochs = config.epochs if args.epochs is None else args.epochs
    batch_size = config.batch_size if args.batch_size is None else args.batch_size
    output_dir = Path(args.out) if args.out else Path(config.output_dir)
    threads = args.threads or config.threads or settings.threads
    if epochs < 0 or batch_size < 1:
        raise ConfigError("epochs must be >= 0 and batch_size >= 1", detail="epochs")

    spec: ModelSpec = (
        config.model_spec
        if isinstance(config.model_spec, ModelSpec)
        else load_model_spec(config.model_spec)
    )

    registry = SourceRegistry()
    registry.register("train", config.dataset.format, config.dataset.model_dump())
    dataset, records = registry.load("train")
    logger.info(
        "dataset_loaded",
        path=config.dataset.path or config.dataset.nodes,
        graphs=len(records),
        task=dataset.task,
    )
    if config.dataset.cutoff is not None:
        records = _featurize(records, config.dataset.cutoff, spec.basis)
        dataset = infer_dataset_spec(records, dataset.target_names, dataset.label_names)
    if config.dataset.target_names:
        records, dataset = select_targets(records, dataset, config.dataset.target_names)
    if config.task is not None and config.task != dataset.task:
        raise ConfigError(f"task is {config.task} but the data is {dataset.task}", detail="task")

    spec = spec.model_copy(update={"seed": seed}).with_dataset(dataset)

    if dataset.task == "node_classification" and len(records) == 1:
        train_part, val_part, _ = split_node_labels(records[0], config.dataset.split, seed)
        train_records, val_records = [train_part], [val_part]
    else:
        train_records, val_records, _ = split_dataset(records, config.dataset.split, seed)
    if not train_records:
        raise ConfigError("no graphs in the training split", detail="dataset.split")

    rng = np.random.default_rng(seed)
    train_batches = batch_graphs(
        train_records, batch_size, shuffle=True, seed=int(rng.integers(2**31)), threads=threads
    )
    # unshuffled, in the order written to val.jsonl
    eval_records = val_records if val_records else train_records
    eval_batches = batch_graphs(eval_records, batch_size, threads=threads)

    model = build_model(spec)
    optimizer = make_optimizer(OptimizerState.from_config(config.optimizer))
    loss_kind = config.loss or TASK_LOSSES[dataset.task]
    logger.info(
        "training_started",
        model=spec.model,
        epochs=epochs,
        train_graphs=len(train_records),
        val_graphs=len(val_records),
        seed=seed,
    )

    output_dir.mkdir(parents=True, exist_ok=True)
    history = fit(
        model,
        train_batches,
        eval_batches,
        dataset,
        optimizer,
        epochs,
        loss_kind,
        metrics_path=output_dir / "metrics.jsonl",
    )
    dump_jsonl_dataset(
        eval_records,
        output_dir / "val.jsonl",
        dataset.target_names,
    )
    ckpt_path = save_checkpoint(
        output_dir / "final.ckpt",
        Checkpoint.from_model(model, optimizer.state, rng, batch_size, dataset),
    )
    logger.info("checkpoint_saved", path=str(ckpt_path))

    summary = {
        "output_dir": str(output_dir),
        "epochs": epochs,
        "metric": history[-1]["metric"] if history else {},
    }
    print(json.dumps(summary))
    return 0


# --- eval ---


def check_compatible(model: GraphModel, data: DatasetSpec) -> None:
    """Raise ConfigError when ``data`` cannot be fed to ``model``."""
    spec = model.spec
    if data.task != spec.task:
        raise ConfigError(f"model is {spec.task}, data is {data.task}", detail="task")
    if data.node_width and data.node_width != spec.widths.node:
        raise ConfigError(
            f"data node width {data.node_width} != model node width {spec.widths.node}",
            detail="node_width",
        )
    if data.edge_width is not None and data.edge_width != (spec.widths.edge or 0):
        raise ConfigError(
            f"data edge width {data.edge_width} != model edge width {spec.widths.edge}",
            detail="edge_width",
        )
    if data.task == "graph_regression":
        if data.num_targets != spec.widths.output:
            raise ConfigError(
                f"data has {data.num_targets} targets, model predicts {spec.widths.output}",
                detail="num_targets",
            )
    elif (data.num_classes or 0) > (spec.widths.output or 0):
        raise ConfigError(
            f"wrong num_classes: data has {data.num_classes}, model has {spec.widths.output}",
            detail="num_classes",
        )


def cmd_eval(args: argparse.Namespace, settings: AppSettings) -> int:
    ckpt = load_checkpoint(args.ckpt)
    model = ckpt.restore_model()
    model.freeze()
    data, records = load_jsonl_dataset(args.data)
    if args.cutoff is not None:
        records = _featurize(records, args.cutoff, model.spec.basis)
        data = infer_dataset_spec(records, data.target_names, data.label_names)
    check_compatible(model, data)

    reference = ckpt.dataset or data
    batches = batch_graphs(
        records, args.batch_size or ckpt.batch_size, threads=args.threads or settings.threads
    )
    metrics = evaluate(model, batches, reference)
    logger.info("evaluation_completed", ckpt=args.ckpt, graphs=len(records), **metrics)
    print(json.dumps(metrics))
    return 0


# --- gradcheck ---


def cmd_gradcheck(args: argparse.Namespace, settings: AppSettings) -> int:
    seed = _resolve_seed(args.seed, None, settings)
    errors = run_gradcheck(args.layer, seed=seed, eps=args.eps)
    rows = []
    for layer, error in errors.items():
        passed = bool(error <= GRADCHECK_TOLERANCE)
        logger.info("gradcheck_layer", layer=layer, max_rel_error=error, passed=passed)
        rows.append({"layer": layer, "max_rel_error": error, "passed": passed})
    _write_csv(pd.DataFrame(rows, columns=["layer", "max_rel_error", "passed"]))
    return 0 if all(row["passed"] for row in rows) else 1


# --- convert ---


def cmd_convert(args: argparse.Namespace, settings: AppSettings) -> int:
    data, records = load_jsonl_dataset(args.input)
    logger.info("dataset_loaded", path=args.input, graphs=len(records), task=data.task)
    if args.cutoff is not None:
        records = _featurize(records, args.cutoff, None)
    if args.out:
        path = dump_jsonl_dataset(records, args.out, data.target_names)
        logger.info("dataset_written", path=str(path), graphs=len(records))
    if args.report or not args.out:
        batches = batch_graphs(
            records, args.batch_size, threads=args.threads or settings.threads
        )
        _write_csv(representation_report(batches))
    return 0


# --- bench ---

BenchInputs = Callable[[np.random.Generator, int, int, int], tuple[Any, ...]]
Kernel = Callable[..., np.ndarray]


def _segment_inputs(
    rng: np.random.Generator, size: int, features: int, segments: int
) -> tuple[Any, ...]:
    return rng.normal(size=(size, features)), rng.integers(0, segments, size=size), segments


def _gather_inputs(
    rng: np.random.Generator, size: int, features: int, segments: int
) -> tuple[Any, ...]:
    return rng.normal(size=(segments, features)), rng.integers(0, segments, size=size)


def _reducer(name: str) -> Kernel:
    def run(values: Any, ids: Any, num_segments: int) -> np.ndarray:
        return kernels.segment_reduce(values, ids, num_segments, name)

    return run


BENCH_KERNELS: dict[str, tuple[Kernel, Kernel, BenchInputs]] = {
    "segment_sum": (_reducer("sum"), kernels.segment_sum_loop, _segment_inputs),
    "segment_mean": (_reducer("mean"), kernels.segment_mean_loop, _segment_inputs),
    "segment_max": (_reducer("max"), kernels.segment_max_loop, _segment_inputs),
    "gather_rows": (kernels.gather_rows, kernels.gather_rows_loop, _gather_inputs),
}


BENCH_COLUMNS = ["kernel", "size", "reps", "vectorized_ns_per_op", "loop_ns_per_op", "speedup"]


def _time_ns(fn: Kernel, inputs: tuple[Any, ...], reps: int) -> float:
    start = time.perf_counter_ns()
    for _ in range(reps):
        fn(*inputs)
    return (time.perf_counter_ns() - start) / reps


def cmd_bench(args: argparse.Namespace, settings: AppSettings) -> int:
    if args.kernel not in BENCH_KERNELS:
        raise NotRegisteredError("kernel", args.kernel, sorted(BENCH_KERNELS))
    if args.reps < 1:
        raise ConfigError(f"--reps must be >= 1, got {args.reps}", detail="reps")
    if any(size < 1 for size in args.sizes):
        raise ConfigError(f"--sizes must be positive, got {args.sizes}", detail="sizes")
    fast, loop, make_inputs = BENCH_KERNELS[args.kernel]
    rng = np.random.default_rng(_resolve_seed(args.seed, None, settings))

    rows = []
    for size in args.sizes:
        segments = args.segments or max(size // 10, 1)
        inputs = make_inputs(rng, size, args.features, segments)
        expected = loop(*inputs)
        if not np.allclose(fast(*inputs), expected, rtol=1e-12, atol=1e-12):
            raise NumericError(
                f"{args.kernel}: vectorized and loop results differ at size {size}",
                detail=args.kernel,
            )
        vectorized_ns = _time_ns(fast, inputs, args.reps)
        loop_ns = _time_ns(loop, inputs, args.reps)
        logger.debug(
            "bench_timed", kernel=args.kernel, size=size, vectorized=vectorized_ns, loop=loop_ns
        )
        rows.append(
            {
                "kernel": args.kernel,
                "size": size,
                "reps": args.reps,
                "vectorized_ns_per_op": round(vectorized_ns, 1),
                "loop_ns_per_op": round(loop_ns, 1),
                "speedup": round(loop_ns / max(vectorized_ns, 1.0), 2),
            }
        )
    _write_csv(pd.DataFrame(rows, columns=BENCH_COLUMNS))
    return 0


# --- parser ---


def _sizes(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="overrides config and RAGGEDNN_SEED")
    common.add_argument("--threads", type=int, default=None, help="batch preparation threads")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING or ERROR")
    common.add_argument("--log-json", action="store_true", help="JSON log lines on stderr")

    parser = argparse.ArgumentParser(
        prog="raggednn", description="Graph neural networks over ragged mini-batches."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", parents=[common], help="train a model from a run config")
    train.add_argument("--config", required=True, help="run config (JSON or YAML)")
    train.add_argument("--epochs", type=int, default=None)
    train.add_argument("--batch-size", type=int, default=None)
    train.add_argument("--out", default=None, help="output directory")
    train.set_defaults(handler=cmd_train)

    ev = sub.add_parser("eval", parents=[common], help="evaluate a checkpoint on JSONL data")
    ev.add_argument("--ckpt", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--batch-size", type=int, default=None)
    ev.add_argument("--cutoff", type=float, default=None, help="expand distances first")
    ev.set_defaults(handler=cmd_eval)

    grad = sub.add_parser("gradcheck", parents=[common], help="finite-difference gradient check")
    grad.add_argument(
        "--layer", required=True, help=f"one of {', '.join([*GRADCHECK_CASES, 'all'])}"
    )
    grad.add_argument("--eps", type=float, default=1e-5)
    grad.set_defaults(handler=cmd_gradcheck)

    conv = sub.add_parser("convert", parents=[common], help="validate, rewrite and report")
    conv.add_argument("--in", dest="input", required=True, help="JSONL dataset")
    conv.add_argument("--report", action="store_true", help="print padded vs ragged storage")
    conv.add_argument("--out", default=None, help="canonical JSONL output")
    conv.add_argument("--cutoff", type=float, default=None)
    conv.add_argument("--batch-size", type=int, default=32)
    conv.set_defaults(handler=cmd_convert)

    bench = sub.add_parser("bench", parents=[common], help="time kernels against loops")
    bench.add_argument("--kernel", required=True, help=f"one of {', '.join(BENCH_KERNELS)}")
    bench.add_argument("--sizes", type=_sizes, default=[1000, 10000, 100000])
    bench.add_argument("--reps", type=int, default=5)
    bench.add_argument("--features", type=int, default=16)
    bench.add_argument("--segments", type=int, default=None)
    bench.set_defaults(handler=cmd_bench)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    settings = get_settings()
    setup_logging(
        level=args.log_level or settings.log_level,
        json_output=args.log_json or settings.log_json,
    )
    try:
        return args.handler(args, settings)
    except RaggedNNError as exc:
        code = exit_code_for(exc)
        logger.error(
            "command_failed",
            command=args.command,
            error_type=type(exc).__name__,
            error_message=exc.message,
            detail=exc.detail,
        )
        print(f"error: {exc.message}", file=sys.stderr)
        return code
    except OSError as exc:
        logger.error(
            "command_failed",
            command=args.command,
            error_type=type(exc).__name__,
            error_message=str(exc),
            detail=str(getattr(exc, "filename", "") or ""),
        )
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        logger.exception(
            "command_failed",
            command=args.command,
            error_type=type(exc).__name__,
            error_message=str(exc),
        )
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
