"""Statevector simulation of layered Ry/CNOT circuits with two gradient engines.

Bit convention (pinned here and nowhere else): qubit 0 is the MOST significant
bit of a basis index, i.e. index i = sum_k b_k * 2**(n-1-k).  Amplitude
embedding places ancillas as the trailing (least significant) qubits, so a
2**q-entry feature vector occupies basis indices k * 2**(n-q) and, for the
10-qubit reconstructor, probability index p reads out pixel p directly.

Ry and CNOT are real, so real inputs stay real; batch kernels are dtype
agnostic and the training path runs on float64 (bit-compatible with the
complex path, whose imaginary lane stays exactly zero).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DimensionError

Z_EXPECTATION = "z_expectation_qubit0"
FULL_PROBABILITIES = "full_probabilities"


@dataclass(frozen=True)
class StateVector:
    """2**n complex amplitudes of an n-qubit register, unit norm."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "amplitudes", np.asarray(self.amplitudes, dtype=np.complex128)
        )
        if self.n_qubits < 1 or self.amplitudes.shape != (2 ** self.n_qubits,):
            raise DimensionError(
                f"need 2**{self.n_qubits} amplitudes, got shape {self.amplitudes.shape}"
            )
        norm_sq = float(np.sum(np.abs(self.amplitudes) ** 2))
        if abs(norm_sq - 1.0) > 1e-10:
            raise ValueError(f"state norm**2 is {norm_sq}, not 1")


@dataclass
class AnsatzSpec:
    """Layered circuit: per layer an Ry on every qubit then the CNOT chain
    (control k -> target k+1); one extra Ry row without entanglers at the end."""

    n_qubits: int
    n_layers: int
    thetas: np.ndarray  # (n_layers + 1, n_qubits)

    def __post_init__(self):
        self.thetas = np.asarray(self.thetas, dtype=np.float64)
        if self.n_qubits < 1 or self.n_layers < 1:
            raise DimensionError("need n_qubits >= 1 and n_layers >= 1")
        expected = (self.n_layers + 1, self.n_qubits)
        if self.thetas.shape != expected:
            raise DimensionError(f"thetas must have shape {expected}, got {self.thetas.shape}")

    @property
    def n_params(self) -> int:
        return self.thetas.size


@dataclass(frozen=True)
class Readout:
    kind: str

    def __post_init__(self):
        if self.kind not in (Z_EXPECTATION, FULL_PROBABILITIES):
            raise ValueError(f"unknown readout kind {self.kind!r}")


def random_ansatz(n_qubits: int, n_layers: int, rng: np.random.Generator) -> AnsatzSpec:
    """Angles uniform in [0, 2*pi), the default initialization."""
    return AnsatzSpec(n_qubits, n_layers, rng.uniform(0.0, 2 * np.pi, (n_layers + 1, n_qubits)))


# ---------------------------------------------------------------------------
# Batch kernels.  States are (B, 2**n) arrays of any float/complex dtype.
# ---------------------------------------------------------------------------


def embed_batch(features: np.ndarray, n_qubits: int) -> np.ndarray:
    """L2-normalize feature rows into (B, 2**n) states, ancillas trailing."""
    features = np.atleast_2d(np.asarray(features, dtype=np.float64))
    width = features.shape[1]
    q = int(width).bit_length() - 1
    if 2 ** q != width:
        raise DimensionError(f"feature length {width} is not a power of two")
    if n_qubits < q:
        raise DimensionError(f"{n_qubits} qubits cannot hold {width} features")
    norms = np.linalg.norm(features, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ValueError("cannot amplitude-embed an all-zero feature vector")
    states = np.zeros((features.shape[0], 2 ** n_qubits))
    states[:, :: 2 ** (n_qubits - q)] = features / norms
    return states


def ry_row_batch(states: np.ndarray, n_qubits: int, angles: np.ndarray) -> None:
    """Apply Ry(angles[q]) to every qubit q, in place."""
    b = states.shape[0]
    for q in range(n_qubits):
        c = np.cos(angles[q] / 2.0)
        s = np.sin(angles[q] / 2.0)
        view = states.reshape(b, 2 ** q, 2, -1)
        x0 = view[:, :, 0, :].copy()
        x1 = view[:, :, 1, :]
        view[:, :, 0, :] = c * x0 - s * x1
        view[:, :, 1, :] = s * x0 + c * x1


@lru_cache(maxsize=None)
def _chain_perms(n_qubits: int):
    """Basis permutation of the CNOT chain: pi maps |x> -> |pi(x)>."""
    idx = np.arange(2 ** n_qubits)
    out = idx.copy()
    for k in range(n_qubits - 1):
        control = (out >> (n_qubits - 1 - k)) & 1
        out = np.where(control == 1, out ^ (1 << (n_qubits - 2 - k)), out)
    inv = np.empty_like(out)
    inv[out] = idx
    out.setflags(write=False)
    inv.setflags(write=False)
    return out, inv


def cnot_chain_batch(states: np.ndarray, n_qubits: int, inverse: bool = False) -> np.ndarray:
    """CNOT chain control k -> target k+1 as one basis permutation."""
    if n_qubits == 1:
        return states
    pi, inv = _chain_perms(n_qubits)
    # forward: out[pi(x)] = in[x]  <=>  out = in[:, inv]
    return states[:, pi if inverse else inv]


def ansatz_states_batch(states: np.ndarray, spec: AnsatzSpec) -> np.ndarray:
    """Run the full ansatz over a batch; returns a new array."""
    if states.shape[1] != 2 ** spec.n_qubits:
        raise DimensionError("state width does not match ansatz qubit count")
    out = states.copy()
    for layer in range(spec.n_layers):
        ry_row_batch(out, spec.n_qubits, spec.thetas[layer])
        out = cnot_chain_batch(out, spec.n_qubits)
    ry_row_batch(out, spec.n_qubits, spec.thetas[spec.n_layers])
    return out


def z0_batch(states: np.ndarray) -> np.ndarray:
    """<Z> of qubit 0 (the most significant bit) per batch row."""
    p = np.abs(states) ** 2 if np.iscomplexobj(states) else states * states
    half = p.shape[1] // 2
    return p[:, :half].sum(axis=1) - p[:, half:].sum(axis=1)


def probabilities_batch(states: np.ndarray) -> np.ndarray:
    return np.abs(states) ** 2 if np.iscomplexobj(states) else states * states


def ansatz_grads_batch(final_states: np.ndarray, bar: np.ndarray,
                       spec: AnsatzSpec) -> np.ndarray:
    """Reverse-mode gradient of sum_b <bar_b, psi_b> wrt every angle.

    Walks the circuit backwards un-applying gates (all gates are orthogonal),
    so nothing is stored during the forward pass.  `final_states` and `bar`
    are consumed as scratch.  Uses d(Ry)/d(theta) = G/2 * Ry with the rotation
    generator G: (x0, x1) -> (-x1, x0), evaluated on the gate's output state.
    """
    n = spec.n_qubits
    b = final_states.shape[0]
    grads = np.zeros((spec.n_layers + 1, n))

    def reverse_ry_row(row: int):
        for q in range(n - 1, -1, -1):
            psi = final_states.reshape(b, 2 ** q, 2, -1)
            br = bar.reshape(b, 2 ** q, 2, -1)
            p0 = psi[:, :, 0, :]
            p1 = psi[:, :, 1, :]
            grads[row, q] = 0.5 * (
                np.sum(br[:, :, 1, :] * p0) - np.sum(br[:, :, 0, :] * p1)
            )
            c = np.cos(spec.thetas[row, q] / 2.0)
            s = np.sin(spec.thetas[row, q] / 2.0)
            for view in (psi, br):  # un-apply: Ry(-theta) = Ry(theta)^T
                x0 = view[:, :, 0, :].copy()
                x1 = view[:, :, 1, :]
                view[:, :, 0, :] = c * x0 + s * x1
                view[:, :, 1, :] = -s * x0 + c * x1

    reverse_ry_row(spec.n_layers)
    for layer in range(spec.n_layers - 1, -1, -1):
        final_states = cnot_chain_batch(final_states, n, inverse=True)
        bar = cnot_chain_batch(bar, n, inverse=True)
        reverse_ry_row(layer)
    return grads


# ---------------------------------------------------------------------------
# Single-state operations.
# ---------------------------------------------------------------------------


def amplitude_embed(features: np.ndarray, n_qubits: int) -> StateVector:
    """Normalized features as amplitudes; surplus qubits start in |0>."""
    return StateVector(n_qubits, embed_batch(features, n_qubits)[0])


def apply_ry(state: StateVector, qubit: int, theta: float) -> StateVector:
    if not 0 <= qubit < state.n_qubits:
        raise IndexError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    a = state.amplitudes.reshape(2 ** qubit, 2, -1)
    x0, x1 = a[:, 0, :], a[:, 1, :]
    out = np.empty_like(a)
    out[:, 0, :] = c * x0 - s * x1
    out[:, 1, :] = s * x0 + c * x1
    return StateVector(state.n_qubits, out.reshape(-1))


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    n = state.n_qubits
    if control == target:
        raise ValueError("control and target must differ")
    for q in (control, target):
        if not 0 <= q < n:
            raise IndexError(f"qubit {q} out of range for {n} qubits")
    psi = state.amplitudes.reshape([2] * n).copy()
    sel0 = [slice(None)] * n
    sel1 = [slice(None)] * n
    sel0[control] = sel1[control] = 1
    sel0[target], sel1[target] = 0, 1
    tmp = psi[tuple(sel0)].copy()
    psi[tuple(sel0)] = psi[tuple(sel1)]
    psi[tuple(sel1)] = tmp
    return StateVector(n, psi.reshape(-1))


def run_ansatz(state: StateVector, spec: AnsatzSpec) -> StateVector:
    if spec.n_qubits != state.n_qubits:
        raise DimensionError("ansatz and state qubit counts differ")
    out = ansatz_states_batch(state.amplitudes[None, :], spec)
    return StateVector(state.n_qubits, out[0])


def expectation_z0(state: StateVector) -> float:
    return float(z0_batch(state.amplitudes[None, :])[0])


def probabilities(state: StateVector) -> np.ndarray:
    return probabilities_batch(state.amplitudes[None, :])[0]


def gradients_backprop(features: np.ndarray, spec: AnsatzSpec, readout: Readout,
                       upstream=None) -> np.ndarray:
    """Exact gradient of the readout (weighted by upstream sensitivities)
    with respect to every angle, shaped like spec.thetas.

    For the Z-expectation readout `upstream` is a scalar (default 1.0); for
    full probabilities it is a vector of d(loss)/d(p_i)."""
    states = embed_batch(features, spec.n_qubits)
    final = ansatz_states_batch(states, spec)
    if readout.kind == Z_EXPECTATION:
        u = 1.0 if upstream is None else float(upstream)
        sign = np.ones(final.shape[1])
        sign[final.shape[1] // 2 :] = -1.0
        bar = 2.0 * u * sign * final
    else:
        lam = np.asarray(upstream, dtype=np.float64)
        if lam.shape != (final.shape[1],):
            raise DimensionError("upstream must give one sensitivity per probability")
        bar = 2.0 * lam * final
    return ansatz_grads_batch(final, bar, spec)


def _scalar_readout(features: np.ndarray, spec: AnsatzSpec, readout) -> float:
    final = ansatz_states_batch(embed_batch(features, spec.n_qubits), spec)
    if isinstance(readout, Readout):
        if readout.kind != Z_EXPECTATION:
            raise ValueError("parameter shift needs a scalar expectation readout")
        return float(z0_batch(final)[0])
    return float(probabilities_batch(final)[0, int(readout)])


def gradients_parameter_shift(features: np.ndarray, spec: AnsatzSpec, readout,
                              return_value: bool = False):
    """Parameter-shift gradient dE/dtheta = (E(+pi/2) - E(-pi/2)) / 2.

    `readout` is a Z-expectation Readout or the index of one probability
    entry.  Evaluates 2 * n_params + 1 circuits: the base value plus two
    shifted circuits per parameter."""
    value = _scalar_readout(features, spec, readout)
    grads = np.zeros_like(spec.thetas)
    shifted = AnsatzSpec(spec.n_qubits, spec.n_layers, spec.thetas.copy())
    for row in range(spec.thetas.shape[0]):
        for q in range(spec.thetas.shape[1]):
            shifted.thetas[row, q] = spec.thetas[row, q] + np.pi / 2
            plus = _scalar_readout(features, shifted, readout)
            shifted.thetas[row, q] = spec.thetas[row, q] - np.pi / 2
            minus = _scalar_readout(features, shifted, readout)
            shifted.thetas[row, q] = spec.thetas[row, q]
            grads[row, q] = 0.5 * (plus - minus)
    return (value, grads) if return_value else grads
