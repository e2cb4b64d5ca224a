"""The four-layer pairwise forward pass.

Layer 1 maps each input to a complementary activation pair (g, 1-g) via a
linear ramp over the model's input box. Layer 2 blends one member of each
pair per binary pattern into 2^n fusion weights. Layer 3 turns those into
individual decisions c_k + theta_k * gamma_k, and Layer 4 averages them
with convex weights beta_k. Because the trainable parameters (c, gamma)
enter linearly, the whole network is an inner product of a feature vector
phi(x) with (c || gamma), which is what makes one-shot least-squares
training possible.

Pattern indexing: pattern k (1-based) flips input i to its falling
activation when bit (n - i) of k-1 is set, so input 1 sits on the most
significant bit, k=1 uses all rising activations and k=2^n all falling.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_INPUTS = 7

ALPHA_SUM_TOL = 1e-12


@lru_cache(maxsize=None)
def _complement_mask(n_inputs: int) -> np.ndarray:
    """(2^n, n) 0/1 matrix; entry [k-1, i-1] flags input i falling in pattern k."""
    patterns = np.arange(2**n_inputs, dtype=np.uint32)
    shifts = np.arange(n_inputs - 1, -1, -1, dtype=np.uint32)
    mask = ((patterns[:, None] >> shifts[None, :]) & 1).astype(np.float64)
    mask.setflags(write=False)
    return mask


@dataclass(frozen=True)
class ActivationConfig:
    """Input-side configuration of one PairNet: blend weights and input box.

    alphas must be in [0, 1] and sum to 1; lo/hi are the per-input ramp
    bounds, in input units (for a local model these are its subspace
    bounds). Instances are immutable and shareable.
    """

    alphas: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        alphas = np.asarray(self.alphas, dtype=np.float64)
        lo = np.asarray(self.lo, dtype=np.float64)
        hi = np.asarray(self.hi, dtype=np.float64)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        n = alphas.shape[0]
        if not 1 <= n <= MAX_INPUTS:
            raise ValueError(f"need 1..{MAX_INPUTS} inputs, got {n}")
        if lo.shape != (n,) or hi.shape != (n,):
            raise ValueError("alphas, lo and hi must have matching length")
        if not (np.isfinite(alphas).all() and np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise ValueError("configuration entries must be finite")
        if (alphas < 0).any() or (alphas > 1).any():
            raise ValueError("each blend weight must lie in [0, 1]")
        if abs(alphas.sum() - 1.0) > ALPHA_SUM_TOL:
            raise ValueError("blend weights must sum to 1")
        if not (hi > lo).all():
            raise ValueError("every upper bound must exceed its lower bound")

    @property
    def n(self) -> int:
        return self.alphas.shape[0]

    @classmethod
    def equal_weights(cls, lo, hi) -> "ActivationConfig":
        lo = np.asarray(lo, dtype=np.float64)
        return cls(np.full(lo.shape[0], 1.0 / lo.shape[0]), lo, hi)


@dataclass(frozen=True)
class PairNetParams:
    """The 2^(n+1) trainable values of one local model: levels c and swings gamma."""

    c: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        gamma = np.asarray(self.gamma, dtype=np.float64)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "gamma", gamma)
        size = c.shape[0]
        if gamma.shape != (size,) or size < 2 or size & (size - 1):
            raise ValueError("c and gamma must share a power-of-two length")
        if not (np.isfinite(c).all() and np.isfinite(gamma).all()):
            raise ValueError("parameters must be finite")

    @property
    def n(self) -> int:
        return self.c.shape[0].bit_length() - 1

    @classmethod
    def zeros(cls, n_inputs: int) -> "PairNetParams":
        return cls(np.zeros(2**n_inputs), np.zeros(2**n_inputs))


@dataclass(frozen=True)
class ForwardTrace:
    """Every intermediate layer value for a single input."""

    g: np.ndarray
    gbar: np.ndarray
    w: np.ndarray
    beta: np.ndarray
    theta: np.ndarray
    ybar: np.ndarray
    f: float


def pair_activations(x, cfg: ActivationConfig):
    """Layer 1: rising ramps g and their complements 1-g, clamped to [0, 1]."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (cfg.n,):
        raise ValueError(f"expected {cfg.n} inputs, got shape {x.shape}")
    if not np.isfinite(x).all():
        raise ValueError("inputs must be finite")
    g = np.clip((x - cfg.lo) / (cfg.hi - cfg.lo), 0.0, 1.0)
    return g, 1.0 - g


def _fusion(g, gbar, alphas) -> np.ndarray:
    """Fusion weights for (..., n)-shaped activations, one pattern per column.

    Accumulates input contributions in a fixed order with elementwise ops
    only, so a row of a batched call is bitwise identical to the same
    sample pushed through on its own. The trainer relies on that to make
    incremental updates reproduce batch fits exactly.
    """
    n = g.shape[-1]
    mask = _complement_mask(n)
    w = np.zeros(g.shape[:-1] + (2**n,))
    for i in range(n):
        rising = g[..., i, None]
        falling = gbar[..., i, None]
        w += alphas[i] * ((1.0 - mask[:, i]) * rising + mask[:, i] * falling)
    return w


def fusion_weights(g, gbar, alphas) -> np.ndarray:
    """Layer 2: one alpha-blend per binary pattern over the 2n pair outputs."""
    return _fusion(
        np.asarray(g, dtype=np.float64),
        np.asarray(gbar, dtype=np.float64),
        np.asarray(alphas, dtype=np.float64),
    )


def feature_vector(w: np.ndarray) -> np.ndarray:
    """phi = (beta_1..beta_{2^n}, beta_1 theta_1..beta_{2^n} theta_{2^n}).

    The prediction is exactly phi . (c || gamma), so this is the design row
    the trainer accumulates. Works on (..., 2^n) stacks of fusion weights.
    """
    size = w.shape[-1]
    beta = w * (2.0 / size)  # w / 2^(n-1), exact power-of-two scaling
    theta = 0.5 * (1.0 - w)
    return np.concatenate([beta, beta * theta], axis=-1)


def forward(x, cfg: ActivationConfig, params: PairNetParams) -> ForwardTrace:
    """Full forward pass, keeping every layer value."""
    if params.n != cfg.n:
        raise ValueError("configuration and parameters disagree on input count")
    g, gbar = pair_activations(x, cfg)
    w = _fusion(g, gbar, cfg.alphas)
    beta = w * (2.0 / w.shape[0])
    theta = 0.5 * (1.0 - w)
    ybar = params.c + theta * params.gamma
    f = float(beta @ ybar)
    return ForwardTrace(g=g, gbar=gbar, w=w, beta=beta, theta=theta, ybar=ybar, f=f)


def decompose(trace: ForwardTrace, params: PairNetParams):
    """Split the prediction into its linear and nonlinear halves.

    Returns (sum_k beta_k c_k, sum_k beta_k theta_k gamma_k); the two add
    back to trace.f up to float re-association.
    """
    linear = float(trace.beta @ params.c)
    nonlinear = float(trace.beta @ (trace.theta * params.gamma))
    return linear, nonlinear


def design_matrix(X, cfg: ActivationConfig) -> np.ndarray:
    """Feature rows phi(x) for a batch of inputs, shape (N, 2^(n+1)).

    Row i is bitwise identical to the single-sample feature path for X[i].
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != cfg.n:
        raise ValueError(f"expected (N, {cfg.n}) inputs, got shape {X.shape}")
    if not np.isfinite(X).all():
        raise ValueError("inputs must be finite")
    g = np.clip((X - cfg.lo) / (cfg.hi - cfg.lo), 0.0, 1.0)
    w = _fusion(g, 1.0 - g, cfg.alphas)
    return feature_vector(w)


def predict_batch(X, cfg: ActivationConfig, params: PairNetParams) -> np.ndarray:
    """Vectorized predictions for a batch of inputs."""
    stacked = np.concatenate([params.c, params.gamma])
    return design_matrix(X, cfg) @ stacked
