"""Feedforward ReLU regressor trained on mean-squared error with Adadelta."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, NumericError, SchemaError

log = logging.getLogger(__name__)

SCHEMA = "mlp-relu-v1"
DEFAULT_HIDDEN = (32, 8, 4)


@dataclass
class TrainingConfig:
    epochs: int = 200
    lr: float = 0.1
    rho: float = 0.95
    eps: float = 1e-6
    batch_size: int | None = 32
    seed: int = 0

    def to_dict(self):
        return {k: getattr(self, k) for k in ("epochs", "lr", "rho", "eps", "batch_size", "seed")}


@dataclass
class MlpModel:
    layer_sizes: list
    weights: list  # weights[i] has shape (layer_sizes[i], layer_sizes[i + 1])
    biases: list
    training_config: TrainingConfig = field(default_factory=TrainingConfig)
    loss_history: list = field(default_factory=list)

    @property
    def n_params(self):
        return int(sum(w.size + b.size for w, b in zip(self.weights, self.biases)))

    def params(self):
        return [p for pair in zip(self.weights, self.biases) for p in pair]

    def to_dict(self):
        return {
            "schema_id": SCHEMA,
            "layer_sizes": list(self.layer_sizes),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
            "training_config": self.training_config.to_dict(),
            "loss_history": [float(v) for v in self.loss_history],
        }

    @classmethod
    def from_dict(cls, d):
        if d.get("schema_id") != SCHEMA:
            raise SchemaError(f"not an MLP document: {d.get('schema_id')!r}")
        return cls(
            list(d["layer_sizes"]),
            [np.asarray(w, dtype=np.float64).reshape(a, b) for w, a, b in zip(d["weights"], d["layer_sizes"][:-1], d["layer_sizes"][1:])],
            [np.asarray(b, dtype=np.float64) for b in d["biases"]],
            TrainingConfig(**d.get("training_config", {})),
            list(d.get("loss_history", [])),
        )


def mlp_init(layer_sizes, seed: int = 0) -> MlpModel:
    """He-normal weights and zero biases."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 3:
        raise ConfigError("an MLP needs an input, at least one hidden layer and an output")
    if min(sizes) < 1:
        raise ConfigError("layer widths must be positive")
    rng = np.random.default_rng(seed)
    weights = [rng.standard_normal((a, b)) * np.sqrt(2.0 / a) for a, b in zip(sizes[:-1], sizes[1:])]
    biases = [np.zeros(b) for b in sizes[1:]]
    return MlpModel(sizes, weights, biases, TrainingConfig(seed=seed))


def _as_batch(model, X):
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != model.layer_sizes[0]:
        raise SchemaError(f"network expects {model.layer_sizes[0]} inputs, got {X.shape[1]}")
    return X, single


def _forward(model, X):
    acts = [X]
    h = X
    last = len(model.weights) - 1
    for i, (W, b) in enumerate(zip(model.weights, model.biases)):
        h = h @ W + b
        if i < last:
            h = np.maximum(h, 0.0)
        acts.append(h)
    return acts


def mlp_forward(model: MlpModel, x):
    X, single = _as_batch(model, x)
    y = _forward(model, X)[-1]
    return y[0] if single else y


def _loss_and_grad(model, X, Y):
    acts = _forward(model, X)
    resid = acts[-1] - Y
    loss = float(np.mean(resid**2))
    delta = 2.0 * resid / resid.size
    grads_w = [None] * len(model.weights)
    grads_b = [None] * len(model.weights)
    for i in range(len(model.weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ model.weights[i].T) * (acts[i] > 0)
    return loss, grads_w, grads_b


def _check_xy(model, X, Y):
    X, _ = _as_batch(model, X)
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    if X.shape[0] == 0:
        raise DataError("empty batch")
    if Y.shape != (X.shape[0], model.layer_sizes[-1]):
        raise SchemaError(f"targets must be shaped ({X.shape[0]}, {model.layer_sizes[-1]}), got {Y.shape}")
    return X, Y


def mlp_loss(model: MlpModel, X, Y) -> float:
    X, Y = _check_xy(model, X, Y)
    return float(np.mean((_forward(model, X)[-1] - Y) ** 2))


def mlp_grad(model: MlpModel, X, Y):
    """Backprop gradient of the batch MSE (mean over rows and outputs).

    Returns ``{"weights": [...], "biases": [...], "loss": float}``.
    """
    X, Y = _check_xy(model, X, Y)
    loss, gw, gb = _loss_and_grad(model, X, Y)
    return {"weights": gw, "biases": gb, "loss": loss}


def mlp_train(
    model: MlpModel,
    X,
    Y,
    epochs: int = 200,
    lr: float = 0.1,
    rho: float = 0.95,
    eps: float = 1e-6,
    batch_size: int | None = 32,
    seed: int | None = None,
) -> MlpModel:
    """Adadelta on the MSE, in place; ``batch_size=None`` means full batch.

    Mini-batches are drawn from a seeded permutation each epoch.  The loss
    recorded per epoch is the full-data MSE after that epoch's updates.
    """
    X, Y = _check_xy(model, X, Y)
    seed = model.training_config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    params = model.params()
    eg2 = [np.zeros_like(p) for p in params]
    edx2 = [np.zeros_like(p) for p in params]
    n = X.shape[0]
    bs = n if not batch_size or batch_size >= n else int(batch_size)
    history = []
    for epoch in range(epochs):
        order = np.arange(n) if bs == n else rng.permutation(n)
        for start in range(0, n, bs):
            rows = order[start : start + bs]
            _, gw, gb = _loss_and_grad(model, X[rows], Y[rows])
            grads = [g for pair in zip(gw, gb) for g in pair]
            for p, g, a, d in zip(params, grads, eg2, edx2):
                a *= rho
                a += (1.0 - rho) * g * g
                step = np.sqrt(d + eps) / np.sqrt(a + eps) * g
                p -= lr * step
                d *= rho
                d += (1.0 - rho) * step * step
        loss = float(np.mean((_forward(model, X)[-1] - Y) ** 2))
        if not np.isfinite(loss):
            raise NumericError(f"MLP loss became {loss} at epoch {epoch + 1}")
        history.append(loss)
    model.loss_history = history
    model.training_config = TrainingConfig(epochs, lr, rho, eps, batch_size, seed)
    return model
