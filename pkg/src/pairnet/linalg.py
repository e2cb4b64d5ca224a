"""Dense symmetric solvers for the closed-form training equations.

Everything here operates on Gram systems of dimension 2^(n+1) for n <= 7
inputs, i.e. at most 256x256. Accumulation is plain summation; the solver
is an unpivoted Cholesky factorization wrapped in a deterministic ridge
ladder so that rank-deficient systems (which the pairwise feature map
produces by construction) always yield a finite solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

CLEAN = "clean"
REGULARIZED = "regularized"
FALLBACK_MINIMUM_NORM = "fallback_minimum_norm"

# A Cholesky pivot is rejected when <= PIVOT_RTOL * max diagonal entry.
PIVOT_RTOL = 1e-12
RIDGE_BASE = 1e-10
RIDGE_GROWTH = 100.0
MAX_RIDGE_RETRIES = 4


@dataclass(frozen=True)
class SolveReport:
    """How a solve went: which path was taken and how good the result is.

    ``residual_inf_norm`` is always measured against the unregularized
    matrix, so it reflects the quality of the returned solution for the
    original system, not for the ridged one.
    """

    ridge_applied: float
    condition_flag: str
    residual_inf_norm: float


def rank1_update(gram, moment, phi, y):
    """Fold one sample (phi, y) into the accumulators, in place.

    gram gains outer(phi, phi), which is exactly symmetric because float
    multiplication commutes; moment gains y * phi.
    """
    phi = np.asarray(phi, dtype=np.float64)
    if phi.ndim != 1:
        raise ValueError("phi must be a vector")
    dim = phi.shape[0]
    if gram.shape != (dim, dim) or moment.shape != (dim,):
        raise ValueError(
            f"dimension mismatch: gram {gram.shape}, moment {moment.shape}, "
            f"phi {phi.shape}"
        )
    gram += np.outer(phi, phi)
    moment += y * phi
    return gram, moment


def symmetrize(matrix):
    """Exactly symmetric copy: (M[i,j] + M[j,i]) / 2 on both sides."""
    return 0.5 * (matrix + matrix.T)


def _cholesky_lower(matrix, pivot_floor):
    """Lower Cholesky factor, or None when a pivot falls at or below the floor."""
    dim = matrix.shape[0]
    lower = np.zeros_like(matrix)
    for k in range(dim):
        pivot = matrix[k, k] - lower[k, :k] @ lower[k, :k]
        if not pivot > pivot_floor:  # also rejects NaN
            return None
        root = math.sqrt(pivot)
        lower[k, k] = root
        if k + 1 < dim:
            lower[k + 1 :, k] = (matrix[k + 1 :, k] - lower[k + 1 :, :k] @ lower[k, :k]) / root
    return lower


def _min_norm_solve(gram, moment):
    """Minimum-norm least-squares solution, for ladder-exhausted systems."""
    x, *_ = np.linalg.lstsq(gram, moment, rcond=None)
    return x


def solve_spd(gram, moment):
    """Solve gram @ x = moment for a symmetric (ideally PSD) system.

    Tries a plain Cholesky factorization first; on pivot failure retries
    with Tikhonov ridge lambda = 1e-10 * max(trace/dim, 1), escalating
    x100 up to 4 times, and finally falls back to a minimum-norm solve.
    Never raises on singular input. Deterministic: identical inputs take
    the identical path and produce the identical report.
    """
    gram = np.asarray(gram, dtype=np.float64)
    moment = np.asarray(moment, dtype=np.float64)
    dim = gram.shape[0]
    if gram.ndim != 2 or gram.shape != (dim, dim) or moment.shape != (dim,) or dim < 1:
        raise ValueError("solve_spd needs a square matrix and a matching vector")
    if not (np.isfinite(gram).all() and np.isfinite(moment).all()):
        raise ValueError("solve_spd requires finite entries")

    base = RIDGE_BASE * max(np.trace(gram) / dim, 1.0)
    ladder = [0.0] + [base * RIDGE_GROWTH**i for i in range(MAX_RIDGE_RETRIES)]
    for ridge in ladder:
        attempt = gram if ridge == 0.0 else gram + ridge * np.eye(dim)
        pivot_floor = max(PIVOT_RTOL * attempt.diagonal().max(), 0.0)
        lower = _cholesky_lower(attempt, pivot_floor)
        if lower is None:
            continue
        x = solve_triangular(lower, moment, lower=True)
        x = solve_triangular(lower.T, x, lower=False)
        flag = CLEAN if ridge == 0.0 else REGULARIZED
        residual = float(np.abs(gram @ x - moment).max())
        return x, SolveReport(ridge, flag, residual)

    x = _min_norm_solve(gram, moment)
    residual = float(np.abs(gram @ x - moment).max())
    # ridge_applied records the last ladder rung tried; the flag invariant
    # (zero ridge iff clean) then holds on every path.
    return x, SolveReport(ladder[-1], FALLBACK_MINIMUM_NORM, residual)
