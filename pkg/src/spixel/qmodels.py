"""Quantum models: the 10-circuit one-vs-all margin classifier and the
10-qubit probability-readout image reconstructor, both trained with Adam.

Though the margin objective couples all ten scores, each circuit's gradient
flows only through its own score, so the per-circuit updates stay structurally
independent while the loss is minimized jointly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, NumericError
from .nn import TrainConfig, AdamState, adam_step
from .qsim import (
    AnsatzSpec,
    ansatz_grads_batch,
    ansatz_states_batch,
    embed_batch,
    probabilities_batch,
    random_ansatz,
    z0_batch,
)

MARGIN_DELTA = 0.15
DEFAULT_QUANTUM_LR = 0.01
EVAL_CHUNK = 1024


@dataclass
class QuantumClassifier:
    """One Ry/CNOT-chain circuit plus bias per class; prediction by argmax."""

    circuits: list[AnsatzSpec]
    biases: np.ndarray
    delta: float = MARGIN_DELTA

    def __post_init__(self):
        self.biases = np.asarray(self.biases, dtype=np.float64)
        if self.biases.shape != (len(self.circuits),):
            raise DimensionError("need one bias per circuit")
        if self.delta <= 0:
            raise ValueError("margin delta must be positive")
        first = self.circuits[0]
        for c in self.circuits:
            if (c.n_qubits, c.n_layers) != (first.n_qubits, first.n_layers):
                raise DimensionError("all circuits must share qubit and layer counts")

    @property
    def n_classes(self) -> int:
        return len(self.circuits)


@dataclass
class QuantumReconstructor:
    """Single circuit whose output probabilities are read as pixel values."""

    spec: AnsatzSpec


def build_quantum_classifier(n_layers: int, seed: int = 0, n_classes: int = 10,
                             n_qubits: int = 6) -> QuantumClassifier:
    rng = np.random.default_rng(seed)
    circuits = [random_ansatz(n_qubits, n_layers, rng) for _ in range(n_classes)]
    return QuantumClassifier(circuits, np.zeros(n_classes))


def build_quantum_reconstructor(n_layers: int, seed: int = 0,
                                n_qubits: int = 10) -> QuantumReconstructor:
    rng = np.random.default_rng(seed)
    return QuantumReconstructor(random_ansatz(n_qubits, n_layers, rng))


def classifier_parameter_count(model: QuantumClassifier) -> int:
    """n_classes * (n_qubits * (n_layers + 1) + 1), counting biases."""
    spec = model.circuits[0]
    return model.n_classes * (spec.n_qubits * (spec.n_layers + 1) + 1)


def reconstructor_parameter_count(model: QuantumReconstructor) -> int:
    return model.spec.n_params


def _score_batch(model: QuantumClassifier, features: np.ndarray,
                 keep_states: bool = False):
    states = embed_batch(features, model.circuits[0].n_qubits)
    finals = []
    scores = np.empty((states.shape[0], model.n_classes))
    for j, circuit in enumerate(model.circuits):
        final = ansatz_states_batch(states, circuit)
        scores[:, j] = z0_batch(final) + model.biases[j]
        if keep_states:
            finals.append(final)
    return (scores, finals) if keep_states else scores


def classifier_scores(model: QuantumClassifier, features: np.ndarray) -> np.ndarray:
    """Per-class scores: <Z_0> after each class circuit, plus that class bias."""
    features = np.asarray(features, dtype=np.float64)
    single = features.ndim == 1
    scores = _score_batch(model, np.atleast_2d(features))
    return scores[0] if single else scores


def classifier_predict(model: QuantumClassifier, features: np.ndarray) -> np.ndarray:
    """Argmax class per row (lowest index wins exact ties)."""
    features = np.asarray(features, dtype=np.float64)
    single = features.ndim == 1
    labels = np.argmax(_score_batch(model, np.atleast_2d(features)), axis=1)
    return int(labels[0]) if single else labels


def margin_loss(scores: np.ndarray, labels: np.ndarray, delta: float = MARGIN_DELTA):
    """Mean over the batch of sum_{j != y} max(0, s_j - s_y + delta)."""
    if delta <= 0:
        raise ValueError("margin delta must be positive")
    scores = np.atleast_2d(scores)
    labels = np.asarray(labels, dtype=np.int64)
    n, n_classes = scores.shape
    if np.any(labels < 0) or np.any(labels >= n_classes):
        raise ValueError("label out of range")
    true_scores = scores[np.arange(n), labels]
    hinge = scores - true_scores[:, None] + delta
    hinge[np.arange(n), labels] = 0.0
    return float(np.sum(np.maximum(hinge, 0.0)) / n)


def _margin_loss_grad(scores: np.ndarray, labels: np.ndarray, delta: float):
    """(loss, d loss / d scores) for the batch-mean margin loss."""
    n = scores.shape[0]
    true_scores = scores[np.arange(n), labels]
    hinge = scores - true_scores[:, None] + delta
    hinge[np.arange(n), labels] = 0.0
    active = hinge > 0.0
    loss = float(np.sum(hinge[active]) / n)
    grad = active.astype(np.float64) / n
    grad[np.arange(n), labels] = -active.sum(axis=1) / n
    return loss, grad


def _z0_bar(final: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """d(loss)/d(state) when loss depends on states via <Z_0> only."""
    sign = np.ones(final.shape[1])
    sign[final.shape[1] // 2 :] = -1.0
    return 2.0 * upstream[:, None] * sign * final


def _classifier_accuracy(model: QuantumClassifier, dataset) -> float:
    hits = 0
    for start in range(0, len(dataset), EVAL_CHUNK):
        block = dataset.features[start : start + EVAL_CHUNK]
        pred = np.argmax(_score_batch(model, block), axis=1)
        hits += int(np.sum(pred == dataset.labels[start : start + EVAL_CHUNK]))
    return hits / len(dataset)


def train_quantum_classifier(model: QuantumClassifier, dataset, config: TrainConfig,
                             val=None) -> list[dict]:
    """Joint Adam minimization of the margin loss over all circuits and biases.

    Per-epoch validation accuracy is computed on `val` when given, else on the
    training set."""
    n_qubits = model.circuits[0].n_qubits
    if dataset.features.shape[1] != 2 ** n_qubits:
        raise DimensionError(
            f"feature width {dataset.features.shape[1]} != 2**{n_qubits}"
        )
    params = [c.thetas for c in model.circuits] + [model.biases]
    adam = AdamState.like(params)
    rng = np.random.default_rng(config.seed)
    n = len(dataset)
    history = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            features = dataset.features[idx]
            labels = dataset.labels[idx].astype(np.int64)
            states = embed_batch(features, n_qubits)
            finals = [ansatz_states_batch(states, c) for c in model.circuits]
            scores = np.stack([z0_batch(f) for f in finals], axis=1) + model.biases
            loss, dscores = _margin_loss_grad(scores, labels, model.delta)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite margin loss at epoch {epoch}")
            grads = []
            for j, circuit in enumerate(model.circuits):
                u = dscores[:, j]
                if np.any(u):
                    grads.append(ansatz_grads_batch(finals[j], _z0_bar(finals[j], u), circuit))
                else:
                    grads.append(np.zeros_like(circuit.thetas))
            grads.append(dscores.sum(axis=0))
            adam_step(params, grads, adam, config)
            losses.append(loss)
        history.append({
            "epoch": epoch,
            "train_loss": float(np.mean(losses)),
            "val_metric": _classifier_accuracy(model, val if val is not None else dataset),
        })
    return history


def reconstructor_forward(model: QuantumReconstructor, features: np.ndarray) -> np.ndarray:
    """Output probabilities in pixel order; rows are nonnegative and sum to 1."""
    features = np.asarray(features, dtype=np.float64)
    single = features.ndim == 1
    states = embed_batch(np.atleast_2d(features), model.spec.n_qubits)
    probs = probabilities_batch(ansatz_states_batch(states, model.spec))
    return probs[0] if single else probs


def unit_sum_targets(targets: np.ndarray):
    """Scale each target row to unit sum; returns (normalized, original sums)."""
    targets = np.asarray(targets, dtype=np.float64)
    sums = targets.sum(axis=1)
    if np.any(sums <= 0):
        raise ValueError("cannot normalize a target image with nonpositive sum")
    return targets / sums[:, None], sums


def _reconstruction_mse(model: QuantumReconstructor, features, targets_unit) -> float:
    total = 0.0
    for start in range(0, features.shape[0], EVAL_CHUNK):
        probs = reconstructor_forward(model, features[start : start + EVAL_CHUNK])
        total += float(np.sum((probs - targets_unit[start : start + EVAL_CHUNK]) ** 2))
    return total / targets_unit.size


def train_quantum_reconstructor(model: QuantumReconstructor, dataset,
                                config: TrainConfig, val=None) -> list[dict]:
    """Adam on the MSE between output probabilities and unit-sum targets.

    Dataset targets are raw [0, 1] pixel rows; they are normalized to unit sum
    here because the model output is constrained to the simplex."""
    if dataset.targets is None:
        raise ValueError("reconstruction training needs targets")
    n_qubits = model.spec.n_qubits
    if dataset.targets.shape[1] != 2 ** n_qubits:
        raise DimensionError(f"target width {dataset.targets.shape[1]} != 2**{n_qubits}")
    targets, _ = unit_sum_targets(dataset.targets)
    val_targets = None if val is None else unit_sum_targets(val.targets)[0]
    params = [model.spec.thetas]
    adam = AdamState.like(params)
    rng = np.random.default_rng(config.seed)
    n = len(dataset)
    m = targets.shape[1]
    history = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        losses = []
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            states = embed_batch(dataset.features[idx], n_qubits)
            final = ansatz_states_batch(states, model.spec)
            probs = probabilities_batch(final)
            diff = probs - targets[idx]
            loss = float(np.sum(diff * diff) / diff.size)
            if not np.isfinite(loss):
                raise NumericError(f"non-finite reconstruction loss at epoch {epoch}")
            lam = 2.0 * diff / diff.size  # d(MSE)/d(prob)
            grads = [ansatz_grads_batch(final, 2.0 * lam * final, model.spec)]
            adam_step(params, grads, adam, config)
            losses.append(loss)
        if val is not None:
            metric = _reconstruction_mse(model, val.features, val_targets)
        else:
            metric = _reconstruction_mse(model, dataset.features, targets)
        history.append({
            "epoch": epoch,
            "train_loss": float(np.mean(losses)),
            "val_metric": metric,
        })
    return history
