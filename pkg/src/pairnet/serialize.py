"""Versioned JSON persistence for model banks.

Floats are serialized as shortest round-trip decimals (Python's repr, via
the json module), so a saved bank reloads to bitwise-identical parameters
and statistics. Writes go through a temp file and an atomic rename;
non-finite values are rejected in both directions. Sufficient statistics
travel with the parameters so a reloaded bank keeps learning exactly
where it left off.
"""

from __future__ import annotations

import json
import os
import tempfile

import numpy as np

from .errors import DataError
from .network import ActivationConfig, PairNetParams
from .partition import AxisGrid, PartitionSpec
from .training import EMPTY, FALLBACK_MEAN, FITTED, LocalModel, ModelBank, SufficientStats, global_config, subspace_config

FORMAT_NAME = "pairnet-bank"
FORMAT_VERSION = 1

_STATUSES = (FITTED, FALLBACK_MEAN, EMPTY)


def _local_to_dict(local: LocalModel) -> dict:
    entry = {
        "status": local.status,
        "count": local.stats.count,
        "sum_y": local.stats.sum_y,
        "sum_y2": local.stats.sum_y2,
        "gram": local.stats.gram.tolist(),
        "moment": local.stats.moment.tolist(),
    }
    if local.params is None:
        entry["c"] = None
        entry["gamma"] = None
    else:
        entry["c"] = local.params.c.tolist()
        entry["gamma"] = local.params.gamma.tolist()
    return entry


def bank_to_dict(bank: ModelBank) -> dict:
    return {
        "format": FORMAT_NAME,
        "format_version": FORMAT_VERSION,
        "alphas": bank.alphas.tolist(),
        "partition": {
            "axes": [
                {"lo": axis.lo, "hi": axis.hi, "cuts": axis.cuts.tolist()}
                for axis in bank.partition.axes
            ]
        },
        "local_models": [_local_to_dict(m) for m in bank.local_models],
        "global_fallback": _local_to_dict(bank.global_fallback),
    }


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise DataError(f"model artifact invalid: {message}")


def _array(value, shape, what: str) -> np.ndarray:
    arr = np.asarray(value, dtype=np.float64)
    _require(arr.shape == shape, f"{what} must have shape {shape}, got {arr.shape}")
    _require(bool(np.isfinite(arr).all()), f"{what} contains non-finite values")
    return arr


def _local_from_dict(entry: dict, cfg: ActivationConfig, dim: int, what: str) -> LocalModel:
    _require(isinstance(entry, dict), f"{what} must be an object")
    _require(entry.get("status") in _STATUSES, f"{what} has unknown status {entry.get('status')!r}")
    status = entry["status"]
    count = entry.get("count")
    _require(isinstance(count, int) and count >= 0, f"{what} count must be a non-negative integer")
    _require((count == 0) == (status == EMPTY), f"{what} count and status disagree")
    stats = SufficientStats(
        gram=_array(entry.get("gram"), (dim, dim), f"{what} gram"),
        moment=_array(entry.get("moment"), (dim,), f"{what} moment"),
        count=count,
        sum_y=float(entry.get("sum_y", 0.0)),
        sum_y2=float(entry.get("sum_y2", 0.0)),
    )
    if status == EMPTY:
        return LocalModel(cfg, stats, None, EMPTY, None)
    size = dim // 2
    params = PairNetParams(
        _array(entry.get("c"), (size,), f"{what} c"),
        _array(entry.get("gamma"), (size,), f"{what} gamma"),
    )
    return LocalModel(cfg, stats, params, status, None)


def bank_from_dict(payload: dict) -> ModelBank:
    _require(isinstance(payload, dict), "top level must be an object")
    _require(payload.get("format") == FORMAT_NAME, f"not a {FORMAT_NAME} artifact")
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise DataError(
            f"model artifact version {version!r} not supported (expected {FORMAT_VERSION})"
        )
    partition_block = payload.get("partition")
    _require(isinstance(partition_block, dict) and "axes" in partition_block, "missing partition.axes")
    axes = []
    for i, axis in enumerate(partition_block["axes"]):
        _require(
            isinstance(axis, dict) and {"lo", "hi", "cuts"} <= set(axis),
            f"axis {i} must carry lo/hi/cuts",
        )
        try:
            axes.append(AxisGrid(axis["lo"], axis["hi"], np.asarray(axis["cuts"], dtype=np.float64)))
        except ValueError as exc:
            raise DataError(f"model artifact invalid: axis {i}: {exc}") from exc
    spec = PartitionSpec(tuple(axes))

    alphas = _array(payload.get("alphas"), (spec.n,), "alphas")
    dim = 2 ** (spec.n + 1)
    entries = payload.get("local_models")
    _require(isinstance(entries, list) and len(entries) == spec.M, f"need {spec.M} local models")
    local_models = tuple(
        _local_from_dict(entry, subspace_config(j, spec, alphas), dim, f"local model {j}")
        for j, entry in enumerate(entries)
    )
    global_fallback = _local_from_dict(
        payload.get("global_fallback"), global_config(spec, alphas), dim, "global fallback"
    )
    return ModelBank(spec, local_models, global_fallback, alphas)


def _reject_constant(token: str):
    raise DataError(f"model artifact invalid: non-finite literal {token!r}")


def save_bank(bank: ModelBank, path) -> None:
    """Serialize atomically: write a sibling temp file, then rename over."""
    payload = json.dumps(bank_to_dict(bank), sort_keys=True, allow_nan=False, indent=1)
    directory = os.path.dirname(os.fspath(path)) or "."
    handle, temp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(handle, "w", encoding="utf-8") as stream:
            stream.write(payload)
            stream.write("\n")
        os.replace(temp_path, path)
    except BaseException:
        if os.path.exists(temp_path):
            os.unlink(temp_path)
        raise


def load_bank(path) -> ModelBank:
    try:
        with open(path, encoding="utf-8") as stream:
            payload = json.load(stream, parse_constant=_reject_constant)
    except OSError as exc:
        raise DataError(f"cannot read model artifact {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"model artifact {path} is not valid JSON: {exc}") from exc
    return bank_from_dict(payload)
