"""Backprop-trained fully connected baseline for the benchmark harness.

A small multilayer perceptron (default two hidden layers of 50 tanh
neurons) trained on z-scored inputs and targets with mini-batch gradient
descent, plus a per-sample fine-tune entry point used by the daily
incremental protocol. Written directly in numpy so the gradients are
checkable against finite differences, and fully deterministic for a given
seed: the shuffle stream and optimizer state live on the model, so
training E1 epochs and then E2 more reproduces a single E1+E2 run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("tanh", "relu")
OPTIMIZERS = ("adam", "sgd")


@dataclass(frozen=True)
class MlpConfig:
    hidden_layers: int = 2
    neurons_per_layer: int = 50
    activation: str = "tanh"
    optimizer: str = "adam"
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    epochs: int = 1000
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.hidden_layers < 1:
            raise ValueError("need at least one hidden layer")
        if self.neurons_per_layer < 1:
            raise ValueError("need at least one neuron per layer")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")
        if self.epochs < 1:
            raise ValueError("need at least one epoch")
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}")


@dataclass
class MlpModel:
    """Weights plus everything needed to continue training deterministically."""

    config: MlpConfig
    weights: list[np.ndarray]
    biases: list[np.ndarray]
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float
    y_scale: float
    rng: np.random.Generator
    adam_m: list[np.ndarray] = field(default_factory=list)
    adam_v: list[np.ndarray] = field(default_factory=list)
    adam_step: int = 0

    @property
    def n_inputs(self) -> int:
        return self.weights[0].shape[0]

    def parameter_count(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)


def _init_model(n_inputs: int, cfg: MlpConfig) -> MlpModel:
    rng = np.random.default_rng(cfg.seed)
    sizes = [n_inputs] + [cfg.neurons_per_layer] * cfg.hidden_layers + [1]
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes, sizes[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    model = MlpModel(
        config=cfg,
        weights=weights,
        biases=biases,
        x_mean=np.zeros(n_inputs),
        x_scale=np.ones(n_inputs),
        y_mean=0.0,
        y_scale=1.0,
        rng=rng,
    )
    model.adam_m = [np.zeros_like(p) for p in model.weights + model.biases]
    model.adam_v = [np.zeros_like(p) for p in model.weights + model.biases]
    return model


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    return np.tanh(z) if kind == "tanh" else np.maximum(z, 0.0)


def _activate_grad(a: np.ndarray, kind: str) -> np.ndarray:
    # both derivatives are cheap functions of the activation itself
    return 1.0 - a * a if kind == "tanh" else (a > 0).astype(np.float64)


def _forward_normalized(model: MlpModel, xn: np.ndarray) -> list[np.ndarray]:
    """Activations per layer on already-normalized inputs (input included)."""
    activations = [xn]
    hidden = len(model.weights) - 1
    for layer, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = activations[-1] @ w + b
        activations.append(_activate(z, model.config.activation) if layer < hidden else z)
    return activations


def loss_and_gradients(model: MlpModel, xn: np.ndarray, yn: np.ndarray):
    """Mean squared error and its gradients, on the normalized scale."""
    activations = _forward_normalized(model, xn)
    prediction = activations[-1][:, 0]
    residual = prediction - yn
    loss = float(residual @ residual) / yn.shape[0]

    grad_w = [None] * len(model.weights)
    grad_b = [None] * len(model.biases)
    delta = (2.0 / yn.shape[0]) * residual[:, None]
    for layer in range(len(model.weights) - 1, -1, -1):
        grad_w[layer] = activations[layer].T @ delta
        grad_b[layer] = delta.sum(axis=0)
        if layer > 0:
            delta = (delta @ model.weights[layer].T) * _activate_grad(
                activations[layer], model.config.activation
            )
    return loss, grad_w, grad_b


def _apply_gradients(model: MlpModel, grad_w, grad_b) -> None:
    cfg = model.config
    params = model.weights + model.biases
    grads = grad_w + grad_b
    if cfg.optimizer == "sgd":
        for p, g in zip(params, grads):
            p -= cfg.learning_rate * g
        return
    model.adam_step += 1
    t = model.adam_step
    for i, (p, g) in enumerate(zip(params, grads)):
        m = model.adam_m[i]
        v = model.adam_v[i]
        m *= cfg.adam_beta1
        m += (1.0 - cfg.adam_beta1) * g
        v *= cfg.adam_beta2
        v += (1.0 - cfg.adam_beta2) * (g * g)
        m_hat = m / (1.0 - cfg.adam_beta1**t)
        v_hat = v / (1.0 - cfg.adam_beta2**t)
        p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)


def _normalize_x(model: MlpModel, X: np.ndarray) -> np.ndarray:
    return (X - model.x_mean) / model.x_scale


def _run_epochs(model: MlpModel, X: np.ndarray, y: np.ndarray, epochs: int) -> None:
    xn = _normalize_x(model, X)
    yn = (y - model.y_mean) / model.y_scale
    n = y.shape[0]
    batch = model.config.batch_size
    with np.errstate(over="ignore", invalid="ignore"):  # divergence raises below
        for _ in range(epochs):
            order = model.rng.permutation(n)
            for start in range(0, n, batch):
                rows = order[start : start + batch]
                loss, grad_w, grad_b = loss_and_gradients(model, xn[rows], yn[rows])
                if not np.isfinite(loss):
                    raise FloatingPointError(
                        f"training diverged (non-finite loss) under {model.config}"
                    )
                _apply_gradients(model, grad_w, grad_b)


def mlp_train(X, y, cfg: MlpConfig) -> MlpModel:
    """Pre-train a model on a dataset for cfg.epochs epochs."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != y.shape[0] or X.shape[0] == 0:
        raise ValueError("X must be (N, n) with matching non-empty targets")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("training data must be finite")

    model = _init_model(X.shape[1], cfg)
    model.x_mean = X.mean(axis=0)
    scale = X.std(axis=0)
    model.x_scale = np.where(scale > 0, scale, 1.0)
    model.y_mean = float(y.mean())
    y_scale = float(y.std())
    model.y_scale = y_scale if y_scale > 0 else 1.0

    _run_epochs(model, X, y, cfg.epochs)
    return model


def train_more(model: MlpModel, X, y, epochs: int) -> MlpModel:
    """Continue training in place; the shuffle stream and optimizer carry on."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _run_epochs(model, X, y, epochs)
    return model


def mlp_fine_tune(model: MlpModel, x, y: float, epochs: int) -> MlpModel:
    """Take `epochs` full gradient steps on one sample, in place.

    This is the per-event incremental regime: no shuffling, optimizer
    state continues. epochs=0 leaves the model untouched.
    """
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if not (np.isfinite(x).all() and np.isfinite(y)):
        raise ValueError("fine-tune sample must be finite")
    xn = _normalize_x(model, x)
    yn = np.array([(y - model.y_mean) / model.y_scale])
    for _ in range(epochs):
        loss, grad_w, grad_b = loss_and_gradients(model, xn, yn)
        if not np.isfinite(loss):
            raise FloatingPointError(
                f"fine-tuning diverged (non-finite loss) under {model.config}"
            )
        _apply_gradients(model, grad_w, grad_b)
    return model


def mlp_predict(model: MlpModel, X) -> np.ndarray | float:
    """Denormalized predictions; scalar for a single sample.

    Rows are evaluated one at a time so a prediction is a pure function of
    its input, bitwise independent of whatever else sits in the batch
    (gemm kernels do not guarantee that for whole-batch evaluation).
    """
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    rows = X.reshape(1, -1) if single else X
    values = np.empty(rows.shape[0])
    for i in range(rows.shape[0]):
        xn = _normalize_x(model, rows[i : i + 1])
        out = _forward_normalized(model, xn)[-1][0, 0]
        values[i] = out * model.y_scale + model.y_mean
    if not np.isfinite(values).all():
        raise FloatingPointError("model produced a non-finite prediction")
    return float(values[0]) if single else values


class MlpOnline:
    """Protocol adapter: predict, then fine-tune on each revealed event."""

    def __init__(self, model: MlpModel, fine_tune_epochs: int):
        self.model = model
        self.fine_tune_epochs = fine_tune_epochs

    def predict_event(self, x):
        return mlp_predict(self.model, x), None, False

    def learn_event(self, x, y: float, index: int) -> None:
        mlp_fine_tune(self.model, x, y, self.fine_tune_epochs)
