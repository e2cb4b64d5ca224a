"""scikit-learn style estimators wrapping the functional core.

PairNetRegressor fits a grid-partitioned bank of local pairwise networks
in one pass (no gradient descent); partial_fit after a fit performs exact
incremental updates, equivalent to refitting on everything seen.
BackpropMlpRegressor wraps the backprop baseline under the same surface
so the two models swap freely inside pipelines and benchmarks.
"""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .baseline import MlpConfig, mlp_fine_tune, mlp_predict, mlp_train
from .network import MAX_INPUTS
from .partition import PartitionSpec, even_grid, quantile_grid, random_grid
from .streaming import StreamEvent, update
from .training import fit_bank

GRID_CHOICES = ("even", "quantile", "uniform")


class PairNetRegressor(RegressorMixin, BaseEstimator):
    """Subspace-partitioned pairwise network trained by least squares.

    Parameters
    ----------
    intervals : int or sequence of int, default=2
        Number of intervals per input axis; an int applies to every axis.
        The partition has prod(intervals) local models.
    grid : {'even', 'quantile', 'uniform'}, default='even'
        How interior cut points are placed: equal widths, training-data
        quantiles, or uniform random draws (seeded by random_state).
    alphas : array-like, optional
        Input blend weights; must sum to 1. Defaults to equal weights.
    bounds : array-like of shape (n_features, 2), optional
        Input box of the partition. Defaults to the per-feature min/max of
        the training data. Inputs outside the box clamp to the edge cells.
    random_state : int, optional
        Seed for the 'uniform' grid mode.

    Attributes
    ----------
    bank_ : ModelBank
        The fitted local models plus the bank-wide fallback.
    n_features_in_ : int
        Number of features seen during fit (at most 7: the network width
        grows as 2**n_features).
    """

    def __init__(self, intervals=2, grid="even", alphas=None, bounds=None, random_state=None):
        self.intervals = intervals
        self.grid = grid
        self.alphas = alphas
        self.bounds = bounds
        self.random_state = random_state

    def _validate_inputs(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        if X.shape[1] > MAX_INPUTS:
            raise ValueError(
                f"PairNetRegressor supports at most {MAX_INPUTS} features "
                f"(2**(n+1) parameters per subspace); got {X.shape[1]}"
            )
        return X.astype(np.float64, copy=False), y.astype(np.float64, copy=False)

    def _intervals_per_axis(self, n: int) -> list[int]:
        if isinstance(self.intervals, numbers.Integral):
            counts = [int(self.intervals)] * n
        else:
            counts = [int(m) for m in self.intervals]
            if len(counts) != n:
                raise ValueError(f"intervals covers {len(counts)} axes, data has {n}")
        if any(m < 1 for m in counts):
            raise ValueError("interval counts must be >= 1")
        return counts

    def _build_partition(self, X: np.ndarray) -> PartitionSpec:
        n = X.shape[1]
        if self.bounds is None:
            lo, hi = X.min(axis=0), X.max(axis=0)
        else:
            box = np.asarray(self.bounds, dtype=np.float64)
            if box.shape != (n, 2):
                raise ValueError(f"bounds must have shape ({n}, 2)")
            lo, hi = box[:, 0].copy(), box[:, 1].copy()
        flat = hi <= lo
        hi[flat] = lo[flat] + 1.0  # degenerate axes get a unit-wide box

        if self.grid not in GRID_CHOICES:
            raise ValueError(f"grid must be one of {GRID_CHOICES}")
        counts = self._intervals_per_axis(n)
        rng = np.random.default_rng(self.random_state)
        axes = []
        for i, m in enumerate(counts):
            if self.grid == "even":
                axes.append(even_grid(lo[i], hi[i], m))
            elif self.grid == "quantile":
                axes.append(quantile_grid(lo[i], hi[i], m, X[:, i]))
            else:
                axes.append(random_grid(lo[i], hi[i], m, rng, mode="uniform"))
        return PartitionSpec(tuple(axes))

    def fit(self, X, y):
        """Fit one local model per subspace in a single pass over (X, y)."""
        X, y = self._validate_inputs(X, y)
        spec = self._build_partition(X)
        alphas = None if self.alphas is None else np.asarray(self.alphas, dtype=np.float64)
        self.bank_ = fit_bank(X, y, spec, alphas=alphas)
        self.n_features_in_ = X.shape[1]
        return self

    def partial_fit(self, X, y):
        """Exact incremental updates; the first call behaves like fit.

        After the initial fit the partition is frozen, each new sample is
        folded into its subspace's sufficient statistics, and only that
        subspace is re-solved.
        """
        if not hasattr(self, "bank_"):
            return self.fit(X, y)
        X, y = self._validate_inputs(X, y)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"partial_fit got {X.shape[1]} features, expected {self.n_features_in_}"
            )
        bank = self.bank_
        for i in range(X.shape[0]):
            bank = update(bank, StreamEvent(i, X[i], float(y[i])))
        self.bank_ = bank
        return self

    def predict(self, X):
        check_is_fitted(self, "bank_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"predict got {X.shape[1]} features, expected {self.n_features_in_}")
        return self.bank_.predict(X.astype(np.float64, copy=False))


class BackpropMlpRegressor(RegressorMixin, BaseEstimator):
    """Small fully connected network trained by mini-batch backprop.

    The comparison baseline: same estimator surface as PairNetRegressor,
    but trained iteratively. partial_fit fine-tunes on each given sample
    for fine_tune_epochs gradient steps (the per-event incremental
    regime).
    """

    def __init__(
        self,
        hidden_layers=2,
        neurons_per_layer=50,
        activation="tanh",
        optimizer="adam",
        learning_rate=1e-3,
        epochs=100,
        batch_size=32,
        fine_tune_epochs=None,
        random_state=0,
    ):
        self.hidden_layers = hidden_layers
        self.neurons_per_layer = neurons_per_layer
        self.activation = activation
        self.optimizer = optimizer
        self.learning_rate = learning_rate
        self.epochs = epochs
        self.batch_size = batch_size
        self.fine_tune_epochs = fine_tune_epochs
        self.random_state = random_state

    def _config(self) -> MlpConfig:
        return MlpConfig(
            hidden_layers=self.hidden_layers,
            neurons_per_layer=self.neurons_per_layer,
            activation=self.activation,
            optimizer=self.optimizer,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            seed=0 if self.random_state is None else int(self.random_state),
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        self.model_ = mlp_train(X.astype(np.float64), y.astype(np.float64), self._config())
        self.n_features_in_ = X.shape[1]
        return self

    def partial_fit(self, X, y):
        if not hasattr(self, "model_"):
            return self.fit(X, y)
        X, y = check_X_y(X, y, y_numeric=True)
        steps = self.epochs if self.fine_tune_epochs is None else self.fine_tune_epochs
        for i in range(X.shape[0]):
            mlp_fine_tune(self.model_, X[i], float(y[i]), steps)
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        X = check_array(X)
        result = mlp_predict(self.model_, X.astype(np.float64, copy=False))
        return np.atleast_1d(result)
