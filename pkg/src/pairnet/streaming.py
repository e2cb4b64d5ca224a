"""Exact incremental learning and the predict-then-update protocol.

A new sample is folded into the sufficient statistics of exactly one
subspace (plus the bank-wide fallback) and only that subspace is
re-solved, so an update costs the same whether the model has seen a
thousand samples or a million, and the updated bank equals a from-scratch
batch fit on the union of everything seen.

The protocol driver replays a stream in order: forecast each event before
its target is revealed, record the squared error, then learn the event.
Any model exposing predict_event/learn_event can be driven, so the
backprop baseline and the bank share one harness.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .network import feature_vector, fusion_weights, pair_activations
from .partition import SubspaceId, locate
from .training import ModelBank, refit_subspace


@dataclass(frozen=True)
class StreamEvent:
    """One observation of the stream, in arrival order."""

    index: int
    x: np.ndarray
    y: float


@dataclass(frozen=True)
class PredictionRecord:
    index: int
    predicted: float
    actual: float
    squared_error: float
    subspace: int | None
    used_fallback: bool
    update_seconds: float


@dataclass(frozen=True)
class SimulationReport:
    """Aggregated outcome of one predict-then-update run."""

    n_events: int
    avg_mse: float
    avg_update_seconds: float
    records: tuple[PredictionRecord, ...]

    def prefix(self, n_events: int) -> "SimulationReport":
        """The report this run would have produced had it stopped after n events.

        Valid because updates are deterministic and causal: the first n
        records do not depend on anything after them.
        """
        if not 1 <= n_events <= self.n_events:
            raise ValueError(f"prefix length {n_events} outside [1, {self.n_events}]")
        records = self.records[:n_events]
        return SimulationReport(
            n_events=n_events,
            avg_mse=float(np.mean([r.squared_error for r in records])),
            avg_update_seconds=float(np.mean([r.update_seconds for r in records])),
            records=records,
        )

    def median_update_seconds(self) -> float:
        return float(np.median([r.update_seconds for r in self.records]))


def predict(bank: ModelBank, x) -> tuple[float, SubspaceId, bool]:
    """Route x to its subspace and answer with the responsible model."""
    return bank.predict_one(x)


def update(bank: ModelBank, event: StreamEvent) -> ModelBank:
    """New bank with the event folded into its subspace and the fallback.

    Rejects non-finite events without touching the bank. The input bank is
    never mutated, so readers holding it keep a consistent snapshot.
    """
    x = np.asarray(event.x, dtype=np.float64)
    if not (np.isfinite(x).all() and np.isfinite(event.y)):
        raise ValueError(f"event {event.index} is not finite; bank left unchanged")
    sid = locate(x, bank.partition)
    local_cfg = bank.local_models[sid.flat].cfg
    g, gbar = pair_activations(x, local_cfg)
    phi = feature_vector(fusion_weights(g, gbar, local_cfg.alphas))
    global_cfg = bank.global_fallback.cfg
    g, gbar = pair_activations(x, global_cfg)
    phi_global = feature_vector(fusion_weights(g, gbar, global_cfg.alphas))
    return refit_subspace(bank, sid.flat, phi, phi_global, float(event.y))


class PairNetOnline:
    """Protocol adapter holding the current bank snapshot."""

    def __init__(self, bank: ModelBank):
        self.bank = bank

    def predict_event(self, x) -> tuple[float, int | None, bool]:
        value, sid, used_fallback = self.bank.predict_one(x)
        return value, sid.flat, used_fallback

    def learn_event(self, x, y: float, index: int) -> None:
        self.bank = update(self.bank, StreamEvent(index, x, y))


def simulate_protocol(model, stream, n_events: int) -> SimulationReport:
    """Drive a pre-trained online model through the first n events.

    For each event the model forecasts from the state produced by the
    previous events only, then learns the revealed target; the learning
    call is timed with a monotonic clock.
    """
    if n_events < 1:
        raise ValueError("need at least one event")
    if len(stream) < n_events:
        raise ValueError(f"stream holds {len(stream)} events, {n_events} requested")
    records = []
    for event in stream[:n_events]:
        predicted, subspace, used_fallback = model.predict_event(event.x)
        error = (predicted - event.y) ** 2
        started = time.perf_counter()
        model.learn_event(event.x, event.y, event.index)
        elapsed = time.perf_counter() - started
        records.append(
            PredictionRecord(
                index=event.index,
                predicted=float(predicted),
                actual=float(event.y),
                squared_error=float(error),
                subspace=subspace,
                used_fallback=used_fallback,
                update_seconds=elapsed,
            )
        )
    return SimulationReport(
        n_events=n_events,
        avg_mse=float(np.mean([r.squared_error for r in records])),
        avg_update_seconds=float(np.mean([r.update_seconds for r in records])),
        records=tuple(records),
    )


def events_from_arrays(X, y, start_index: int = 0) -> list[StreamEvent]:
    """Wrap aligned arrays as an ordered event stream."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return [
        StreamEvent(start_index + i, X[i], float(y[i])) for i in range(y.shape[0])
    ]
