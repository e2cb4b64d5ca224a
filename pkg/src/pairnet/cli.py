"""Command-line surface: train, select, simulate, bench.

Every command takes a JSON run configuration (schema-validated up front,
unknown keys rejected) plus optional --out/--seed overrides. Reports are
written as JSON and as fixed-width text rendered from the same rows.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
degeneracy (all search candidates failed).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .baseline import MlpConfig, MlpOnline, mlp_train
from .dataio import SplitPlan, parse_csv, split, synth_series, window
from .errors import ConfigError, DataError, DegenerateSearchError
from .partition import PartitionSpec, even_grid, quantile_grid, random_grid
from .reporting import (
    REFERENCE_FIGURES,
    BenchRow,
    environment_metadata,
    mlp_payload_bytes,
    pairnet_payload_bytes,
    pivot_rows,
    render_table,
    rows_to_json,
)
from .selection import SearchConfig, random_search
from .serialize import load_bank, save_bank
from .streaming import PairNetOnline, events_from_arrays, simulate_protocol
from .training import ModelBank, fit_bank, training_mse

logger = logging.getLogger(__name__)

_INTERVALS_SCHEMA = {
    "oneOf": [
        {"type": "integer", "minimum": 1},
        {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
    ]
}

_BASELINE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "hidden_layers": {"type": "integer", "minimum": 1},
        "neurons_per_layer": {"type": "integer", "minimum": 1},
        "activation": {"enum": ["tanh", "relu"]},
        "optimizer": {"enum": ["adam", "sgd"]},
        "learning_rate": {"type": "number", "exclusiveMinimum": 0},
        "epochs": {"type": "integer", "minimum": 1},
        "batch_size": {"type": "integer", "minimum": 1},
        "fine_tune_epochs": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer"},
    },
}

RUN_CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["dataset", "window", "split"],
    "properties": {
        "dataset": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "maxProperties": 1,
            "properties": {
                "csv": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["path"],
                    "properties": {
                        "path": {"type": "string"},
                        "value_column": {"type": "string"},
                        "date_column": {"type": "string"},
                    },
                },
                "synth": {
                    "type": "object",
                    "additionalProperties": False,
                    "required": ["kind", "length"],
                    "properties": {
                        "kind": {"enum": ["ar1", "sine_plus_noise"]},
                        "length": {"type": "integer", "minimum": 2},
                        "seed": {"type": "integer"},
                        "params": {"type": "object"},
                    },
                },
            },
        },
        "window": {"type": "integer", "minimum": 1, "maximum": 7},
        "split": {
            "type": "object",
            "additionalProperties": False,
            "required": ["train_count", "test_counts"],
            "properties": {
                "train_count": {"type": "integer", "minimum": 1},
                "test_counts": {
                    "type": "array",
                    "items": {"type": "integer", "minimum": 1},
                    "minItems": 1,
                },
            },
        },
        "alphas": {"type": "array", "items": {"type": "number"}},
        "partition": {
            "type": "object",
            "additionalProperties": False,
            "required": ["intervals"],
            "properties": {
                "intervals": _INTERVALS_SCHEMA,
                "grid": {"enum": ["even", "quantile", "uniform"]},
            },
        },
        "search": {
            "type": "object",
            "additionalProperties": False,
            "required": ["candidates"],
            "properties": {
                "candidates": {"type": "integer", "minimum": 1},
                "interval_choices": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "oneOf": [
                            {"type": "integer", "minimum": 1},
                            {
                                "type": "array",
                                "items": {"type": "integer", "minimum": 1},
                                "minItems": 1,
                            },
                        ]
                    },
                },
                "grid_mode": {"enum": ["even", "quantile", "uniform"]},
                "evaluation": {
                    "oneOf": [
                        {"const": "train_mse"},
                        {
                            "type": "object",
                            "additionalProperties": False,
                            "required": ["holdout"],
                            "properties": {
                                "holdout": {
                                    "type": "number",
                                    "exclusiveMinimum": 0,
                                    "maximum": 0.5,
                                }
                            },
                        },
                    ]
                },
                "seed": {"type": "integer"},
            },
        },
        "baselines": {"type": "array", "items": _BASELINE_SCHEMA},
        "out_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
    },
}


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        config = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    try:
        jsonschema.validate(config, RUN_CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        location = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{path}: at {location}: {exc.message}") from exc
    return config


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as stream:
            stream.write(text)
        os.replace(temp, path)
    except BaseException:
        if os.path.exists(temp):
            os.unlink(temp)
        raise


def _write_json(path: Path, payload) -> None:
    _atomic_write_text(path, json.dumps(payload, indent=1, sort_keys=True, allow_nan=False) + "\n")


def load_dataset(config: dict):
    block = config["dataset"]
    if "csv" in block:
        csv_cfg = block["csv"]
        series = parse_csv(
            csv_cfg["path"],
            value_column=csv_cfg.get("value_column", "VALUE"),
            date_column=csv_cfg.get("date_column", "DATE"),
        )
    else:
        synth = block["synth"]
        series = synth_series(
            synth["kind"], synth["length"], synth.get("seed", 0), synth.get("params")
        )
    ds = window(series, config["window"])
    plan = SplitPlan(config["split"]["train_count"], tuple(config["split"]["test_counts"]))
    train, stream = split(ds, plan)
    return train, stream, plan


def _alphas(config: dict, n: int):
    if "alphas" not in config:
        return None
    alphas = np.asarray(config["alphas"], dtype=np.float64)
    if alphas.shape != (n,):
        raise ConfigError(f"alphas must have {n} entries, got {alphas.shape[0]}")
    return alphas


def build_partition(train, config: dict, seed: int) -> PartitionSpec:
    block = config.get("partition")
    if block is None:
        raise ConfigError("this command needs a 'partition' block in the config")
    intervals = block["intervals"]
    n = train.n
    counts = [intervals] * n if isinstance(intervals, int) else list(intervals)
    if len(counts) != n:
        raise ConfigError(f"partition.intervals covers {len(counts)} axes, window is {n}")
    grid = block.get("grid", "even")
    lo = train.X.min(axis=0)
    hi = train.X.max(axis=0)
    rng = np.random.default_rng(seed)
    axes = []
    for i, m in enumerate(counts):
        if grid == "even":
            axes.append(even_grid(lo[i], hi[i], m))
        elif grid == "quantile":
            axes.append(quantile_grid(lo[i], hi[i], m, train.X[:, i]))
        else:
            axes.append(random_grid(lo[i], hi[i], m, rng, mode="uniform"))
    return PartitionSpec(tuple(axes))


def bank_name(bank: ModelBank) -> str:
    return "PairNet_" + "".join(str(m) for m in bank.partition.shape)


def _train_summary(bank: ModelBank, mse: float) -> tuple[dict, str]:
    entries = []
    cells = []
    for j, local in enumerate(bank.local_models):
        entry = {
            "subspace": j,
            "count": local.stats.count,
            "status": local.status,
            "training_mse": None,
            "condition_flag": None,
        }
        if local.diagnostics is not None:
            entry["training_mse"] = local.diagnostics.training_mse
            entry["condition_flag"] = local.diagnostics.solve_report.condition_flag
        entries.append(entry)
        cells.append(
            [
                str(j),
                str(local.stats.count),
                local.status,
                "-" if entry["training_mse"] is None else format(entry["training_mse"], ".6f"),
                entry["condition_flag"] or "-",
            ]
        )
    table = render_table(["Subspace", "Samples", "Status", "TrainMSE", "Solve"], cells)
    summary = {"model": bank_name(bank), "training_mse": mse, "subspaces": entries}
    return summary, table


def cmd_train(config: dict, out_dir: Path, seed: int) -> int:
    train, _, _ = load_dataset(config)
    spec = build_partition(train, config, seed)
    alphas = _alphas(config, train.n)
    bank = fit_bank(train.X, train.y, spec, alphas=alphas)
    mse = training_mse(bank, train.X, train.y)

    name = bank_name(bank)
    artifact = out_dir / f"{name.lower()}.json"
    out_dir.mkdir(parents=True, exist_ok=True)
    save_bank(bank, artifact)

    summary, table = _train_summary(bank, mse)
    _write_json(out_dir / "train_summary.json", summary)
    print(f"{name}: trained on {len(train)} samples, training MSE {mse:.6f}")
    print(table)
    print(f"model artifact: {artifact}")
    return 0


def cmd_select(config: dict, out_dir: Path, seed: int) -> int:
    train, _, _ = load_dataset(config)
    block = config.get("search")
    if block is None:
        raise ConfigError("select needs a 'search' block in the config")
    evaluation = block.get("evaluation", {"holdout": 0.2})
    holdout = None if evaluation == "train_mse" else evaluation["holdout"]
    choices = block.get("interval_choices", [1, 2])
    if choices and isinstance(choices[0], list):
        choices = tuple(tuple(c) for c in choices)
    else:
        choices = tuple(choices)
    search_config = SearchConfig(
        n_candidates=block["candidates"],
        interval_choices=choices,
        grid_mode=block.get("grid_mode", "quantile"),
        holdout=holdout,
        seed=block.get("seed", seed),
    )
    alphas = _alphas(config, train.n)
    bank, leaderboard = random_search(train.X, train.y, search_config, alphas=alphas)

    out_dir.mkdir(parents=True, exist_ok=True)
    artifact = out_dir / "pairnet_selected.json"
    save_bank(bank, artifact)
    board = [
        {
            "rank": entry.rank,
            "candidate": entry.index,
            "shape": list(entry.partition.shape),
            "cuts": [axis.cuts.tolist() for axis in entry.partition.axes],
            "score": entry.score,
        }
        for entry in leaderboard
    ]
    _write_json(out_dir / "leaderboard.json", board)

    cells = [
        [str(e["rank"]), str(e["candidate"]), "x".join(map(str, e["shape"])), f"{e['score']:.6f}"]
        for e in board[:10]
    ]
    print(f"evaluated {len(leaderboard)} candidates; best {bank_name(bank)}")
    print(render_table(["Rank", "Candidate", "Shape", "Score"], cells))
    print(f"model artifact: {artifact}")
    return 0


def _load_banks(model_paths) -> list[tuple[str, ModelBank]]:
    banks = []
    for path in model_paths:
        bank = load_bank(path)
        banks.append((bank_name(bank), bank))
    return banks


def _baseline_entries(config: dict):
    for block in config.get("baselines", []):
        fine_tune = block.get("fine_tune_epochs", block.get("epochs", 1000))
        cfg = MlpConfig(
            hidden_layers=block.get("hidden_layers", 2),
            neurons_per_layer=block.get("neurons_per_layer", 50),
            activation=block.get("activation", "tanh"),
            optimizer=block.get("optimizer", "adam"),
            learning_rate=block.get("learning_rate", 1e-3),
            epochs=block.get("epochs", 1000),
            batch_size=block.get("batch_size", 32),
            seed=block.get("seed", 0),
        )
        name = block.get(
            "name", f"MLP_{cfg.hidden_layers}x{cfg.neurons_per_layer}"
        )
        yield name, cfg, fine_tune


def cmd_simulate(config: dict, out_dir: Path, seed: int, model_paths) -> int:
    train, stream_ds, plan = load_dataset(config)
    if not model_paths and not config.get("baselines"):
        raise ConfigError("simulate needs --model artifacts and/or config baselines")
    stream = events_from_arrays(stream_ds.X, stream_ds.y)
    test_counts = sorted(plan.test_counts)
    max_count = test_counts[-1]

    rows: list[BenchRow] = []
    for name, bank in _load_banks(model_paths):
        report = simulate_protocol(PairNetOnline(bank), stream, max_count)
        payload = pairnet_payload_bytes(bank)
        for count in test_counts:
            prefix = report.prefix(count)
            rows.append(
                BenchRow(
                    model=name,
                    epochs=1,
                    n_events=count,
                    avg_mse=prefix.avg_mse,
                    avg_update_seconds=prefix.avg_update_seconds,
                    median_update_seconds=prefix.median_update_seconds(),
                    payload_parameter_bytes=payload["parameters"],
                    payload_total_bytes=payload["total_with_statistics"],
                )
            )
        logger.info("%s: simulated %d events", name, max_count)

    for name, mlp_config, fine_tune_epochs in _baseline_entries(config):
        logger.info("pre-training %s for %d epochs", name, mlp_config.epochs)
        model = mlp_train(train.X, train.y, mlp_config)
        report = simulate_protocol(MlpOnline(model, fine_tune_epochs), stream, max_count)
        payload = mlp_payload_bytes(model)
        for count in test_counts:
            prefix = report.prefix(count)
            rows.append(
                BenchRow(
                    model=name,
                    epochs=mlp_config.epochs,
                    n_events=count,
                    avg_mse=prefix.avg_mse,
                    avg_update_seconds=prefix.avg_update_seconds,
                    median_update_seconds=prefix.median_update_seconds(),
                    payload_parameter_bytes=payload,
                    payload_total_bytes=payload,
                )
            )

    mse_table = pivot_rows(rows, "avg_mse", test_counts, ".4f")
    seconds_table = pivot_rows(rows, "avg_update_seconds", test_counts, ".5f")
    text = (
        "Average prediction MSE per stream length\n"
        + mse_table
        + "\n\nAverage per-event update seconds\n"
        + seconds_table
        + "\n"
    )
    payload_json = {
        "environment": environment_metadata(),
        "protocol": {"train_count": plan.train_count, "test_counts": test_counts},
        "rows": rows_to_json(rows),
        "reference": REFERENCE_FIGURES,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "simulate_report.json", payload_json)
    _atomic_write_text(out_dir / "simulate_report.txt", text)
    print(text, end="")
    return 0


def cmd_bench(config: dict, out_dir: Path, seed: int, model_paths) -> int:
    train, stream_ds, plan = load_dataset(config)
    stream = events_from_arrays(stream_ds.X, stream_ds.y)
    count = min(len(stream), 100)

    rows = []
    memory_cells = []
    for name, bank in _load_banks(model_paths):
        report = simulate_protocol(PairNetOnline(bank), stream, count)
        payload = pairnet_payload_bytes(bank)
        rows.append(
            {
                "model": name,
                "epochs": 1,
                "events_timed": count,
                "median_update_seconds": report.median_update_seconds(),
                "avg_update_seconds": report.avg_update_seconds,
                "payload_bytes": payload,
            }
        )
        memory_cells.append(
            [
                name,
                str(payload["parameters"]),
                str(payload["total_with_statistics"]),
                f"{report.median_update_seconds():.6f}",
            ]
        )

    for name, mlp_config, fine_tune_epochs in _baseline_entries(config):
        model = mlp_train(train.X, train.y, mlp_config)
        report = simulate_protocol(MlpOnline(model, fine_tune_epochs), stream, count)
        payload = mlp_payload_bytes(model)
        rows.append(
            {
                "model": name,
                "epochs": mlp_config.epochs,
                "events_timed": count,
                "median_update_seconds": report.median_update_seconds(),
                "avg_update_seconds": report.avg_update_seconds,
                "payload_bytes": {"parameters": payload, "total_with_statistics": payload},
            }
        )
        memory_cells.append(
            [name, str(payload), str(payload), f"{report.median_update_seconds():.6f}"]
        )

    table = render_table(
        ["Model", "ParamBytes", "TotalBytes", "MedianUpdate(s)"], memory_cells
    )
    reference_cells = [
        [label, str(kb)] for label, kb in REFERENCE_FIGURES["memory_kb"].items()
    ]
    reference_table = render_table(["Reference model", "Memory (KB)"], reference_cells)
    text = (
        "Computed payloads and measured update times\n"
        + table
        + "\n\nReference memory figures (KB)\n"
        + reference_table
        + "\n"
    )
    payload_json = {
        "environment": environment_metadata(),
        "rows": rows,
        "reference": REFERENCE_FIGURES,
    }
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "bench_report.json", payload_json)
    _atomic_write_text(out_dir / "bench_report.txt", text)
    print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pairnet",
        description="One-shot least-squares PairNet training, selection, and benchmarking",
    )
    parser.add_argument("--version", action="version", version=f"pairnet {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    for name, needs_models in (
        ("train", False),
        ("select", False),
        ("simulate", True),
        ("bench", True),
    ):
        sub = commands.add_parser(name)
        sub.add_argument("--config", required=True, help="JSON run configuration")
        sub.add_argument("--out", default=None, help="output directory (overrides config)")
        sub.add_argument("--seed", type=int, default=None, help="seed override")
        if needs_models:
            sub.add_argument(
                "--model",
                action="append",
                default=[],
                help="model artifact JSON (repeatable)",
            )
    return parser


def _configure_logging() -> None:
    level = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}.get(
        os.environ.get("PAIRNET_VERBOSITY", "info"), logging.INFO
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _configure_logging()
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        out_dir = Path(args.out or config.get("out_dir", "."))
        seed = args.seed if args.seed is not None else config.get("seed", 0)
        if args.command == "train":
            return cmd_train(config, out_dir, seed)
        if args.command == "select":
            return cmd_select(config, out_dir, seed)
        if args.command == "simulate":
            return cmd_simulate(config, out_dir, seed, args.model)
        return cmd_bench(config, out_dir, seed, args.model)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except DegenerateSearchError as exc:
        print(f"degenerate search: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
