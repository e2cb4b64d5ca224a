"""One-shot least-squares training of local models over a partition.

Each subspace keeps sufficient statistics (Gram matrix of feature rows and
the target moment vector); fitting solves the resulting normal equations
directly, so training is a single pass over the data and later samples can
be folded in exactly. Degenerate subspaces degrade gracefully: a singular
system takes the solver's ridge path, an inconsistent fallback takes the
subspace mean, and an empty subspace delegates to the bank-wide fallback
model at prediction time.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import linalg
from .network import (
    ActivationConfig,
    PairNetParams,
    design_matrix,
    feature_vector,
    forward,
    fusion_weights,
    pair_activations,
)
from .partition import PartitionSpec, SubspaceId, id_from_flat, locate, locate_batch, subspace_bounds

FITTED = "fitted"
FALLBACK_MEAN = "fallback_mean"
EMPTY = "empty"

# An exhausted solve whose normal residual exceeds this (relative) limit is
# treated as inconsistent and replaced by the subspace mean.
MEAN_FALLBACK_RTOL = 1e-6


@dataclass
class SufficientStats:
    """Exactly refittable summary of all samples a subspace has seen."""

    gram: np.ndarray
    moment: np.ndarray
    count: int
    sum_y: float
    sum_y2: float

    @classmethod
    def zeros(cls, dim: int) -> "SufficientStats":
        return cls(np.zeros((dim, dim)), np.zeros(dim), 0, 0.0, 0.0)

    @property
    def dim(self) -> int:
        return self.moment.shape[0]

    def copy(self) -> "SufficientStats":
        return SufficientStats(
            self.gram.copy(), self.moment.copy(), self.count, self.sum_y, self.sum_y2
        )

    def add(self, phi: np.ndarray, y: float) -> None:
        if not np.isfinite(y):
            raise ValueError("target must be finite")
        linalg.rank1_update(self.gram, self.moment, phi, y)
        self.count += 1
        self.sum_y += y
        self.sum_y2 += y * y

    def add_batch(self, phis: np.ndarray, ys: np.ndarray) -> None:
        """Fold rows in order, one rank-one update per sample.

        Plain per-sample summation keeps the op sequence identical whether
        a sample arrives inside a batch or alone later, which is what
        makes incremental refits reproduce batch fits bitwise.
        """
        if not np.isfinite(ys).all():
            raise ValueError("targets must be finite")
        if phis.shape != (ys.shape[0], self.dim):
            raise ValueError("design block does not match the accumulator dimension")
        for phi, y in zip(phis, ys):
            linalg.rank1_update(self.gram, self.moment, phi, float(y))
            self.sum_y += float(y)
            self.sum_y2 += float(y) * float(y)
        self.count += int(ys.shape[0])

    def sse(self, stacked_params: np.ndarray) -> float:
        """Sum of squared residuals at the given (c || gamma), from moments only."""
        value = (
            self.sum_y2
            - 2.0 * (stacked_params @ self.moment)
            + stacked_params @ self.gram @ stacked_params
        )
        return max(float(value), 0.0)


@dataclass(frozen=True)
class FitDiagnostics:
    training_mse: float
    solve_report: linalg.SolveReport | None
    normal_residual: float


@dataclass(frozen=True)
class LocalModel:
    """One subspace's model: configuration, statistics, parameters, status."""

    cfg: ActivationConfig
    stats: SufficientStats
    params: PairNetParams | None
    status: str
    diagnostics: FitDiagnostics | None

    def predict_one(self, x) -> float:
        return forward(x, self.cfg, self.params).f

    def predict(self, X) -> np.ndarray:
        stacked = np.concatenate([self.params.c, self.params.gamma])
        return design_matrix(X, self.cfg) @ stacked


def accumulate(stats: SufficientStats, x, y: float, cfg: ActivationConfig) -> SufficientStats:
    """Fold one sample into the statistics (in place; returned for chaining)."""
    g, gbar = pair_activations(x, cfg)
    phi = feature_vector(fusion_weights(g, gbar, cfg.alphas))
    stats.add(phi, float(y))
    return stats


def fit_local(stats: SufficientStats, cfg: ActivationConfig) -> LocalModel:
    """Solve the normal equations for one subspace, degrading as needed."""
    if stats.count == 0:
        return LocalModel(cfg, stats, None, EMPTY, None)

    size = stats.dim // 2
    solution, report = linalg.solve_spd(stats.gram, stats.moment)
    normal_residual = report.residual_inf_norm
    limit = MEAN_FALLBACK_RTOL * (1.0 + np.abs(stats.moment).max())
    if report.condition_flag == linalg.FALLBACK_MINIMUM_NORM and normal_residual > limit:
        mean = stats.sum_y / stats.count
        params = PairNetParams(np.full(size, mean), np.zeros(size))
        mse = max(stats.sum_y2 / stats.count - mean * mean, 0.0)
        diagnostics = FitDiagnostics(mse, report, normal_residual)
        return LocalModel(cfg, stats, params, FALLBACK_MEAN, diagnostics)

    params = PairNetParams(solution[:size], solution[size:])
    mse = stats.sse(solution) / stats.count
    diagnostics = FitDiagnostics(mse, report, normal_residual)
    return LocalModel(cfg, stats, params, FITTED, diagnostics)


@dataclass(frozen=True)
class ModelBank:
    """All local models over a partition plus the bank-wide fallback.

    Banks are immutable; incremental updates build a new bank sharing the
    untouched subspaces, so concurrent readers always see a consistent
    snapshot.
    """

    partition: PartitionSpec
    local_models: tuple[LocalModel, ...]
    global_fallback: LocalModel
    alphas: np.ndarray

    def __post_init__(self):
        if len(self.local_models) != self.partition.M:
            raise ValueError("one local model per subspace required")

    @property
    def n(self) -> int:
        return self.partition.n

    def model_for(self, flat: int) -> tuple[LocalModel, bool]:
        """The model answering for a subspace, and whether it is the fallback."""
        local = self.local_models[flat]
        if local.status == EMPTY:
            return self.global_fallback, True
        return local, False

    def predict_one(self, x) -> tuple[float, SubspaceId, bool]:
        sid = locate(x, self.partition)
        model, used_fallback = self.model_for(sid.flat)
        return model.predict_one(np.asarray(x, dtype=np.float64)), sid, used_fallback

    def predict(self, X) -> np.ndarray:
        """Vectorized fallback-aware predictions for a batch of rows."""
        X = np.asarray(X, dtype=np.float64)
        flat = locate_batch(X, self.partition)
        out = np.empty(X.shape[0])
        for j in np.unique(flat):
            rows = flat == j
            model, _ = self.model_for(int(j))
            out[rows] = model.predict(X[rows])
        return out


def _feature_dim(n: int) -> int:
    return 2 ** (n + 1)


def global_config(spec: PartitionSpec, alphas) -> ActivationConfig:
    return ActivationConfig(alphas, spec.lo, spec.hi)


def subspace_config(flat: int, spec: PartitionSpec, alphas) -> ActivationConfig:
    lo, hi = subspace_bounds(id_from_flat(flat, spec), spec)
    return ActivationConfig(alphas, lo, hi)


def fit_bank(X, y, spec: PartitionSpec, alphas=None, touch_counter=None) -> ModelBank:
    """Route every sample to its subspace and fit all local models.

    A single pass in dataset order: each sample is consumed exactly once,
    feeding its subspace's statistics and the bank-wide fallback's in the
    same visit. A later streamed sample extends the identical op sequence,
    so folding data in afterwards reproduces this batch fit bitwise.
    touch_counter, when given, is an int array of len(y) incremented as
    samples are consumed by the sweep.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be (N, n) with matching targets")
    if X.shape[0] == 0:
        raise ValueError("training data must be non-empty")
    if not np.isfinite(y).all():
        raise ValueError("targets must be finite")
    if alphas is None:
        alphas = np.full(spec.n, 1.0 / spec.n)

    dim = _feature_dim(spec.n)
    flat = locate_batch(X, spec)
    stats = [SufficientStats.zeros(dim) for _ in range(spec.M)]
    configs = [subspace_config(j, spec, alphas) for j in range(spec.M)]
    fallback_cfg = global_config(spec, alphas)
    fallback_stats = SufficientStats.zeros(dim)

    # feature rows are precomputed vectorized; design_matrix rows are
    # bitwise identical to the single-sample path, so the order of the
    # rank-one folds below is all that matters
    local_rows = np.empty((X.shape[0], dim))
    for j in np.unique(flat):
        rows = flat == j
        local_rows[rows] = design_matrix(X[rows], configs[j])
    global_rows = design_matrix(X, fallback_cfg)

    for i in range(X.shape[0]):
        stats[flat[i]].add(local_rows[i], float(y[i]))
        fallback_stats.add(global_rows[i], float(y[i]))
        if touch_counter is not None:
            touch_counter[i] += 1

    local_models = tuple(fit_local(s, cfg) for s, cfg in zip(stats, configs))
    global_fallback = fit_local(fallback_stats, fallback_cfg)
    return ModelBank(spec, local_models, global_fallback, np.asarray(alphas, dtype=np.float64))


def training_mse(bank: ModelBank, X, y) -> float:
    """Mean squared prediction error of the bank over a dataset."""
    y = np.asarray(y, dtype=np.float64)
    if y.shape[0] == 0:
        raise ValueError("data must be non-empty")
    residual = y - bank.predict(X)
    return float(residual @ residual) / y.shape[0]


def refit_subspace(bank: ModelBank, flat: int, phi: np.ndarray, phi_global: np.ndarray, y: float) -> ModelBank:
    """New bank with one sample folded into a subspace and the fallback."""
    local = bank.local_models[flat]
    stats = local.stats.copy()
    stats.add(phi, y)
    new_local = fit_local(stats, local.cfg)

    fallback_stats = bank.global_fallback.stats.copy()
    fallback_stats.add(phi_global, y)
    new_fallback = fit_local(fallback_stats, bank.global_fallback.cfg)

    models = list(bank.local_models)
    models[flat] = new_local
    return replace(bank, local_models=tuple(models), global_fallback=new_fallback)
