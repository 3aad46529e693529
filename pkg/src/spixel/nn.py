"""Minimal fully connected network engine: ReLU MLPs, base-2 cross-entropy,
MSE, Adam, and seeded mini-batch training.

Cross-entropy keeps the base-2 logarithm, so its gradient carries a 1/ln(2)
factor relative to the natural-log convention (switchable to natural log by
scaling the learning rate; not exposed as a flag).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NumericError

LOG2_CLAMP = 1e-12

RELU = "relu"
IDENTITY = "identity"
SOFTMAX = "softmax"

CROSS_ENTROPY = "cross_entropy"
MSE = "mse"


@dataclass
class TrainConfig:
    epochs: int = 6
    batch_size: int = 64
    learning_rate: float = 1e-3
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not (0 < self.adam_beta1 < 1 and 0 < self.adam_beta2 < 1):
            raise ValueError("Adam betas must lie in (0, 1)")


@dataclass
class DenseLayer:
    weights: np.ndarray  # (n_out, n_in)
    biases: np.ndarray  # (n_out,)
    activation: str

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]


@dataclass
class AdamState:
    step: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    @classmethod
    def like(cls, params: list[np.ndarray]) -> "AdamState":
        return cls(0, [np.zeros_like(p) for p in params], [np.zeros_like(p) for p in params])


class DenseNetwork:
    """A chain of dense layers with per-layer activations and Adam state."""

    def __init__(self, layer_sizes: list[int], activations: list[str], seed: int = 0):
        if len(activations) != len(layer_sizes) - 1:
            raise DimensionError("need one activation per weight layer")
        rng = np.random.default_rng(seed)
        self.layers: list[DenseLayer] = []
        for n_in, n_out, act in zip(layer_sizes, layer_sizes[1:], activations):
            bound = np.sqrt(6.0 / (n_in + n_out))
            w = rng.uniform(-bound, bound, size=(n_out, n_in))
            self.layers.append(DenseLayer(w, np.zeros(n_out), act))
        self.adam: AdamState | None = None

    @property
    def input_size(self) -> int:
        return self.layers[0].n_in

    @property
    def output_size(self) -> int:
        return self.layers[-1].n_out

    def parameters(self) -> list[np.ndarray]:
        params = []
        for layer in self.layers:
            params.extend((layer.weights, layer.biases))
        return params

    def set_parameters(self, params: list[np.ndarray]) -> None:
        for i, layer in enumerate(self.layers):
            layer.weights = params[2 * i]
            layer.biases = params[2 * i + 1]

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self._forward_cached(np.atleast_2d(x))[-1]

    def _forward_cached(self, x: np.ndarray) -> list[np.ndarray]:
        """Post-activation outputs per layer; cache[0] is the input batch."""
        cache = [x]
        for layer in self.layers:
            z = x @ layer.weights.T + layer.biases
            x = _activate(z, layer.activation)
            cache.append(x)
        return cache

    def backward(self, cache: list[np.ndarray], delta_out: np.ndarray) -> list[np.ndarray]:
        """Gradients for every parameter given d(loss)/d(pre-activation of the
        output layer); relies on the softmax/CE and identity/MSE pairings
        folding the output activation into delta_out."""
        grads: list[np.ndarray] = [None] * (2 * len(self.layers))
        delta = delta_out
        for i in range(len(self.layers) - 1, -1, -1):
            layer = self.layers[i]
            grads[2 * i] = delta.T @ cache[i]
            grads[2 * i + 1] = delta.sum(axis=0)
            if i > 0:
                delta = delta @ layer.weights
                if self.layers[i - 1].activation == RELU:
                    delta = delta * (cache[i] > 0)
        return grads


def _activate(z: np.ndarray, kind: str) -> np.ndarray:
    if kind == RELU:
        return np.maximum(z, 0.0)
    if kind == IDENTITY:
        return z
    if kind == SOFTMAX:
        shifted = z - z.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)
    raise ValueError(f"unknown activation {kind!r}")


def build_classifier(seed: int = 0, input_size: int = 64) -> DenseNetwork:
    """64 -> 128 (ReLU) -> 10 (softmax); 9610 parameters at the default width."""
    return DenseNetwork([input_size, 128, 10], [RELU, SOFTMAX], seed)


def build_reconstructor(seed: int = 0, input_size: int = 64) -> DenseNetwork:
    """64 -> 1000 -> 2000 -> 4000 -> 2000 -> 1024, ReLU hidden, linear output."""
    return DenseNetwork(
        [input_size, 1000, 2000, 4000, 2000, 1024],
        [RELU, RELU, RELU, RELU, IDENTITY],
        seed,
    )


def parameter_count(net: DenseNetwork) -> int:
    """Sum over layers of n_out * (n_in + 1)."""
    return sum(layer.n_out * (layer.n_in + 1) for layer in net.layers)


def cross_entropy_loss(predicted: np.ndarray, true_labels: np.ndarray) -> float:
    """Mean -log2 q[i, y_i] over the batch; probabilities clamped at 1e-12."""
    predicted = np.atleast_2d(predicted)
    true_labels = np.asarray(true_labels, dtype=np.int64)
    if np.any(true_labels < 0) or np.any(true_labels >= predicted.shape[1]):
        raise ValueError("label out of range")
    sums = predicted.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-6):
        raise ValueError("predicted rows must sum to 1 (got a softmax-free input?)")
    picked = predicted[np.arange(len(true_labels)), true_labels]
    return float(-np.mean(np.log2(np.maximum(picked, LOG2_CLAMP))))


def mse_loss(predicted: np.ndarray, target: np.ndarray) -> float:
    """Mean of squared differences over every entry."""
    predicted = np.asarray(predicted, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if predicted.shape != target.shape:
        raise DimensionError(f"shape mismatch {predicted.shape} vs {target.shape}")
    return float(np.mean((predicted - target) ** 2))


def adam_step(params: list[np.ndarray], grads: list[np.ndarray], state: AdamState,
              config: TrainConfig) -> None:
    """Standard bias-corrected Adam update, in place."""
    state.step += 1
    t = state.step
    b1, b2 = config.adam_beta1, config.adam_beta2
    for i, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise DimensionError(f"parameter block {i}: shape {p.shape} vs gradient {g.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient in parameter block {i}")
        state.m[i] = b1 * state.m[i] + (1 - b1) * g
        state.v[i] = b2 * state.v[i] + (1 - b2) * g * g
        m_hat = state.m[i] / (1 - b1 ** t)
        v_hat = state.v[i] / (1 - b2 ** t)
        p -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.adam_epsilon)


def _loss_and_delta(net: DenseNetwork, cache: list[np.ndarray], labels_or_targets,
                    loss_kind: str):
    out = cache[-1]
    n = out.shape[0]
    if loss_kind == CROSS_ENTROPY:
        if net.layers[-1].activation != SOFTMAX:
            raise ValueError("cross-entropy training needs a softmax output head")
        y = np.asarray(labels_or_targets, dtype=np.int64)
        loss = cross_entropy_loss(out, y)
        onehot = np.zeros_like(out)
        onehot[np.arange(n), y] = 1.0
        delta = (out - onehot) / (n * np.log(2.0))
    elif loss_kind == MSE:
        if net.layers[-1].activation != IDENTITY:
            raise ValueError("MSE training expects a linear output head")
        target = np.asarray(labels_or_targets, dtype=np.float64)
        loss = mse_loss(out, target)
        delta = 2.0 * (out - target) / out.size
    else:
        raise ValueError(f"unknown loss kind {loss_kind!r}")
    return loss, delta


def batch_gradients(net: DenseNetwork, x: np.ndarray, labels_or_targets, loss_kind: str):
    """(loss, gradient list) for one batch; used by training and gradient checks."""
    cache = net._forward_cached(np.atleast_2d(x))
    loss, delta = _loss_and_delta(net, cache, labels_or_targets, loss_kind)
    return loss, net.backward(cache, delta)


def _val_metric(net: DenseNetwork, dataset, loss_kind: str) -> float:
    out = net.forward(dataset.features)
    if loss_kind == CROSS_ENTROPY:
        return float(np.mean(np.argmax(out, axis=1) == dataset.labels))
    return mse_loss(out, dataset.targets)


def train(net: DenseNetwork, dataset, config: TrainConfig, loss_kind: str,
          val=None) -> list[dict]:
    """Mini-batch Adam training; returns one record per epoch.

    `dataset`/`val` are MeasurementDataset-shaped: .features plus .labels
    (cross-entropy) or .targets (MSE).  The validation metric is accuracy for
    cross-entropy and MSE for regression, computed on `val` when given, else
    on the training set.
    """
    if dataset.features.shape[1] != net.input_size:
        raise DimensionError(
            f"feature width {dataset.features.shape[1]} != network input {net.input_size}"
        )
    y = dataset.labels if loss_kind == CROSS_ENTROPY else dataset.targets
    if y is None:
        raise ValueError("dataset lacks the targets required by the loss")
    params = net.parameters()
    if net.adam is None:
        net.adam = AdamState.like(params)
    rng = np.random.default_rng(config.seed)
    n = len(dataset)
    history = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = batch_gradients(net, dataset.features[idx], y[idx], loss_kind)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite loss {loss} at epoch {epoch}")
            adam_step(params, grads, net.adam, config)
            losses.append(loss)
        history.append({
            "epoch": epoch,
            "train_loss": float(np.mean(losses)),
            "val_metric": _val_metric(net, val if val is not None else dataset, loss_kind),
        })
    return history


def predict_class(net: DenseNetwork, features: np.ndarray) -> np.ndarray:
    """Argmax class per row; ties resolve to the lowest index."""
    return np.argmax(net.forward(features), axis=1)


def predict_image(net: DenseNetwork, features: np.ndarray) -> np.ndarray:
    """Reconstructed pixel rows clamped into [0, 1]."""
    return np.clip(net.forward(features), 0.0, 1.0)
