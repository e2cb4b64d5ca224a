"""Random search over partition candidates, keeping the best bank.

One initial candidate plus K search iterations are generated from a
seeded stream, fitted, and scored; the best (lowest) score wins with ties
broken in favour of the earlier candidate. Candidate RNG streams are
pre-split from the master seed so results do not depend on evaluation
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSearchError
from .partition import PartitionSpec, even_grid, quantile_grid, random_grid
from .training import ModelBank, fit_bank, training_mse

GRID_MODES = ("uniform", "quantile", "even")


@dataclass(frozen=True)
class SearchConfig:
    """Knobs of the random search.

    interval_choices holds the allowed interval counts, one tuple per axis
    (a single tuple is broadcast to every axis). holdout is the fraction
    of the data tail reserved for scoring; None scores on the training
    data itself.
    """

    n_candidates: int
    interval_choices: tuple
    grid_mode: str = "quantile"
    holdout: float | None = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.n_candidates < 1:
            raise ValueError("need at least one search iteration")
        if self.grid_mode not in GRID_MODES:
            raise ValueError(f"grid_mode must be one of {GRID_MODES}")
        if self.holdout is not None and not 0.0 < self.holdout <= 0.5:
            raise ValueError("holdout fraction must lie in (0, 0.5]")
        choices = tuple(self.interval_choices)
        if choices and isinstance(choices[0], (int, np.integer)):
            choices = (choices,)
        if not choices or any(len(c) == 0 for c in choices):
            raise ValueError("interval_choices must be non-empty")
        if any(m < 1 for c in choices for m in c):
            raise ValueError("interval counts must be >= 1")
        object.__setattr__(self, "interval_choices", tuple(tuple(c) for c in choices))

    def choices_for_axes(self, n: int) -> tuple:
        if len(self.interval_choices) == 1:
            return self.interval_choices * n
        if len(self.interval_choices) != n:
            raise ValueError(
                f"interval_choices covers {len(self.interval_choices)} axes, data has {n}"
            )
        return self.interval_choices


@dataclass(frozen=True)
class CandidateScore:
    index: int
    partition: PartitionSpec
    score: float
    rank: int


def evaluate(bank: ModelBank, X, y) -> float:
    """Mean squared error of fallback-aware predictions on a dataset."""
    return training_mse(bank, X, y)


def _candidate_partition(bounds_lo, bounds_hi, choices, mode, rng, X) -> PartitionSpec:
    axes = []
    for i, axis_choices in enumerate(choices):
        m = int(rng.choice(axis_choices))
        if mode == "even":
            axes.append(even_grid(bounds_lo[i], bounds_hi[i], m))
        elif mode == "quantile":
            axes.append(quantile_grid(bounds_lo[i], bounds_hi[i], m, X[:, i]))
        else:
            axes.append(random_grid(bounds_lo[i], bounds_hi[i], m, rng, mode="uniform"))
    return PartitionSpec(tuple(axes))


def random_search(X, y, config: SearchConfig, alphas=None, bounds=None):
    """Algorithmic core of model selection: K+1 candidates, best bank wins.

    Returns (best bank, leaderboard sorted by ascending score). The
    running best is replace-if-strictly-better, so ties keep the earlier
    candidate and the best score is non-increasing over the run.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if bounds is None:
        bounds_lo, bounds_hi = X.min(axis=0), X.max(axis=0)
    else:
        bounds_lo, bounds_hi = (np.asarray(b, dtype=np.float64) for b in bounds)
    choices = config.choices_for_axes(X.shape[1])

    if config.holdout is None:
        fit_X, fit_y, eval_X, eval_y = X, y, X, y
    else:
        # the holdout is the chronological tail: no shuffling, so scoring
        # never peeks at data older than what the candidate was fit on
        cut = len(y) - max(int(math.floor(config.holdout * len(y))), 1)
        if cut < 1:
            raise ValueError("not enough data to carve out the holdout tail")
        fit_X, fit_y, eval_X, eval_y = X[:cut], y[:cut], X[cut:], y[cut:]

    streams = np.random.SeedSequence(config.seed).spawn(config.n_candidates + 1)
    scored = []
    best_bank = None
    best_score = math.inf
    best_index = -1
    for index, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        try:
            spec = _candidate_partition(bounds_lo, bounds_hi, choices, config.grid_mode, rng, fit_X)
            bank = fit_bank(fit_X, fit_y, spec, alphas=alphas)
            score = evaluate(bank, eval_X, eval_y)
        except ValueError:
            scored.append((index, None, math.inf))
            continue
        scored.append((index, spec, score))
        if score < best_score:
            best_bank, best_score, best_index = bank, score, index

    if best_bank is None:
        raise DegenerateSearchError(
            f"all {config.n_candidates + 1} candidates failed to produce a scorable bank"
        )

    ranked = sorted(
        (entry for entry in scored if entry[1] is not None),
        key=lambda entry: (entry[2], entry[0]),
    )
    leaderboard = [
        CandidateScore(index=index, partition=spec, score=score, rank=rank)
        for rank, (index, spec, score) in enumerate(ranked)
    ]
    assert leaderboard[0].index == best_index
    return best_bank, leaderboard
