"""Independent reference computations used to pin expected test values.

These deliberately avoid the code paths under test: elimination instead of
Cholesky, extended-precision mpmath arithmetic instead of float64, exact
Fraction enumeration instead of vectorized numpy.
"""

from fractions import Fraction

import mpmath
import numpy as np


def gauss_jordan_solve(matrix, rhs, dps=60):
    """Solve a square system by Gauss-Jordan elimination with full pivoting."""
    with mpmath.workdps(dps):
        dim = len(rhs)
        aug = mpmath.zeros(dim, dim + 1)
        for i in range(dim):
            for j in range(dim):
                aug[i, j] = mpmath.mpf(float(matrix[i][j]))
            aug[i, dim] = mpmath.mpf(float(rhs[i]))

        col_of_var = list(range(dim))
        for step in range(dim):
            # full pivot over the untouched submatrix
            best, br, bc = mpmath.mpf(0), step, step
            for r in range(step, dim):
                for c in range(step, dim):
                    if abs(aug[r, c]) > best:
                        best, br, bc = abs(aug[r, c]), r, c
            if best == 0:
                raise ZeroDivisionError("singular system in oracle")
            if br != step:
                for c in range(dim + 1):
                    aug[step, c], aug[br, c] = aug[br, c], aug[step, c]
            if bc != step:
                for r in range(dim):
                    aug[r, step], aug[r, bc] = aug[r, bc], aug[r, step]
                col_of_var[step], col_of_var[bc] = col_of_var[bc], col_of_var[step]
            pivot = aug[step, step]
            for c in range(step, dim + 1):
                aug[step, c] /= pivot
            for r in range(dim):
                if r == step:
                    continue
                factor = aug[r, step]
                if factor != 0:
                    for c in range(step, dim + 1):
                        aug[r, c] -= factor * aug[step, c]

        x = np.zeros(dim)
        for row in range(dim):
            x[col_of_var[row]] = float(aug[row, dim])
        return x


def min_norm_lstsq(design, targets, dps=60, rank_rtol=1e-30):
    """Minimum-norm least-squares solution of design @ x ~ targets.

    Uses the identity pinv(Phi) y = pinv(Phi^T Phi) Phi^T y with the
    pseudo-inverse computed from an extended-precision symmetric
    eigendecomposition. Eigenvalues below rank_rtol * max are treated as
    exact zeros (at 60 digits the gap between true rank and rounding noise
    is dozens of orders of magnitude).
    """
    with mpmath.workdps(dps):
        rows = len(targets)
        cols = len(design[0])
        phi = mpmath.zeros(rows, cols)
        y = mpmath.zeros(rows, 1)
        for i in range(rows):
            for j in range(cols):
                phi[i, j] = mpmath.mpf(float(design[i][j]))
            y[i, 0] = mpmath.mpf(float(targets[i]))
        gram = phi.T * phi
        moment = phi.T * y

        eigenvalues, vectors = mpmath.eigsy(gram)
        cutoff = rank_rtol * max(abs(eigenvalues[i]) for i in range(cols))
        x = mpmath.zeros(cols, 1)
        for i in range(cols):
            lam = eigenvalues[i]
            if abs(lam) <= cutoff:
                continue
            v = vectors[:, i]
            coeff = (v.T * moment)[0, 0] / lam
            x += coeff * v
        return np.array([float(x[i, 0]) for i in range(cols)])


def exact_fusion_sum(rising, alphas):
    """Sum of all 2^n fusion weights by exact rational enumeration."""
    n = len(rising)
    g = [Fraction(v) for v in rising]
    a = [Fraction(v) for v in alphas]
    total = Fraction(0)
    for pattern in range(2**n):
        w = Fraction(0)
        for i in range(n):
            flipped = (pattern >> (n - 1 - i)) & 1
            w += a[i] * ((1 - g[i]) if flipped else g[i])
        total += w
    return total
