"""Axis-aligned grid partition of the input box into local subspaces.

Each axis is split into m_i intervals by interior cut points; the cross
product gives M = prod(m_i) subspaces. Lookup uses half-open intervals
with the last one closed, and clamps out-of-range coordinates, so every
finite point maps to exactly one subspace and streamed data can never
fall outside the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Minimum spacing between cuts, as a fraction of the axis span.
MIN_CUT_GAP = 1e-9


@dataclass(frozen=True)
class AxisGrid:
    """One axis of the partition: bounds plus sorted interior cut points."""

    lo: float
    hi: float
    cuts: np.ndarray

    def __post_init__(self):
        cuts = np.asarray(self.cuts, dtype=np.float64)
        object.__setattr__(self, "cuts", cuts)
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.hi > self.lo):
            raise ValueError("axis bounds must be finite with hi > lo")
        if cuts.size:
            if not np.isfinite(cuts).all():
                raise ValueError("cuts must be finite")
            inside = (cuts > self.lo) & (cuts < self.hi)
            if not inside.all():
                raise ValueError("cuts must lie strictly inside (lo, hi)")
            if not (np.diff(cuts) > 0).all():
                raise ValueError("cuts must be strictly increasing")

    @property
    def m(self) -> int:
        return self.cuts.size + 1

    @property
    def edges(self) -> np.ndarray:
        return np.concatenate([[self.lo], self.cuts, [self.hi]])

    def interval_of(self, value: float) -> int:
        """Half-open interval index, last interval closed, out-of-range clamped."""
        return int(np.searchsorted(self.cuts, value, side="right"))


@dataclass(frozen=True)
class PartitionSpec:
    """The full grid: one AxisGrid per input."""

    axes: tuple[AxisGrid, ...]

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(self.axes))
        if not self.axes:
            raise ValueError("need at least one axis")

    @property
    def n(self) -> int:
        return len(self.axes)

    @property
    def M(self) -> int:
        count = 1
        for axis in self.axes:
            count *= axis.m
        return count

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(axis.m for axis in self.axes)

    @property
    def lo(self) -> np.ndarray:
        return np.array([axis.lo for axis in self.axes])

    @property
    def hi(self) -> np.ndarray:
        return np.array([axis.hi for axis in self.axes])


@dataclass(frozen=True)
class SubspaceId:
    """Flat index plus the per-axis interval indices it encodes."""

    flat: int
    per_axis: tuple[int, ...]


def flat_index(per_axis, spec: PartitionSpec) -> int:
    """Mixed-radix encoding with axis 1 most significant."""
    flat = 0
    for idx, axis in zip(per_axis, spec.axes):
        flat = flat * axis.m + idx
    return flat


def id_from_flat(flat: int, spec: PartitionSpec) -> SubspaceId:
    if not 0 <= flat < spec.M:
        raise ValueError(f"subspace index {flat} out of range [0, {spec.M})")
    per_axis = []
    remainder = flat
    for axis in reversed(spec.axes):
        per_axis.append(remainder % axis.m)
        remainder //= axis.m
    return SubspaceId(flat, tuple(reversed(per_axis)))


def locate(x, spec: PartitionSpec) -> SubspaceId:
    """Subspace containing x (out-of-range coordinates clamp to the edge cells)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (spec.n,):
        raise ValueError(f"expected {spec.n} coordinates, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("coordinates must be finite")
    per_axis = tuple(axis.interval_of(v) for axis, v in zip(spec.axes, x))
    return SubspaceId(flat_index(per_axis, spec), per_axis)


def locate_batch(X, spec: PartitionSpec) -> np.ndarray:
    """Flat subspace indices for a batch of rows."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != spec.n:
        raise ValueError(f"expected (N, {spec.n}) coordinates, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("coordinates must be finite")
    flat = np.zeros(X.shape[0], dtype=np.int64)
    for col, axis in enumerate(spec.axes):
        flat = flat * axis.m + np.searchsorted(axis.cuts, X[:, col], side="right")
    return flat


def subspace_bounds(sid: SubspaceId | int, spec: PartitionSpec):
    """The (lo, hi) corner vectors of one subspace."""
    if isinstance(sid, int):
        sid = id_from_flat(sid, spec)
    if sid.flat != flat_index(sid.per_axis, spec) or not 0 <= sid.flat < spec.M:
        raise ValueError(f"inconsistent subspace id {sid}")
    lo = np.empty(spec.n)
    hi = np.empty(spec.n)
    for i, (axis, idx) in enumerate(zip(spec.axes, sid.per_axis)):
        if not 0 <= idx < axis.m:
            raise ValueError(f"interval index {idx} out of range on axis {i}")
        edges = axis.edges
        lo[i] = edges[idx]
        hi[i] = edges[idx + 1]
    return lo, hi


def even_grid(lo: float, hi: float, m: int) -> AxisGrid:
    """m equal-width intervals."""
    if m < 1:
        raise ValueError("interval count must be >= 1")
    cuts = lo + np.arange(1, m) * (hi - lo) / m
    return AxisGrid(lo, hi, cuts)


def quantile_grid(lo: float, hi: float, m: int, data) -> AxisGrid:
    """Cuts at the t/m empirical quantiles, so every interval is populated."""
    if m < 1:
        raise ValueError("interval count must be >= 1")
    data = np.asarray(data, dtype=np.float64)
    if m == 1:
        return AxisGrid(lo, hi, np.empty(0))
    if data.size < m:
        raise ValueError(f"need at least {m} data values for {m} quantile intervals")
    cuts = np.quantile(data, np.arange(1, m) / m)
    cuts = _dedupe_cuts(cuts, lo, hi)
    if cuts.size != m - 1:
        raise ValueError(f"cannot place {m - 1} distinct cuts from the data quantiles")
    return AxisGrid(lo, hi, cuts)


def random_grid(lo, hi, m, rng, mode="uniform", data=None) -> AxisGrid:
    """Randomly placed cuts: uniform draws in (lo, hi) or data quantiles.

    The quantile mode ignores rng for cut positions (they are determined by
    the data) but exists here so the search can treat both modes uniformly.
    """
    if m < 1:
        raise ValueError("interval count must be >= 1")
    if mode == "quantile":
        if data is None:
            raise ValueError("quantile mode needs the training data for this axis")
        return quantile_grid(lo, hi, m, data)
    if mode != "uniform":
        raise ValueError(f"unknown grid mode {mode!r}")
    if m == 1:
        return AxisGrid(lo, hi, np.empty(0))
    for _ in range(100):
        cuts = _dedupe_cuts(np.sort(rng.uniform(lo, hi, size=m - 1)), lo, hi)
        if cuts.size == m - 1:
            return AxisGrid(lo, hi, cuts)
    raise ValueError(f"cannot place {m - 1} distinct cuts in ({lo}, {hi})")


def _dedupe_cuts(cuts, lo, hi):
    """Drop cuts closer than MIN_CUT_GAP * span to a neighbour or an endpoint."""
    gap = MIN_CUT_GAP * (hi - lo)
    kept = []
    previous = lo
    for cut in cuts:
        if cut - previous > gap and hi - cut > gap:
            kept.append(cut)
            previous = cut
    return np.asarray(kept)
