"""Realistic QPU wall-clock model for one training epoch with parameter-shift
gradients: per-element time from gate depths and per-gate times, scaled by
shot count and dataset size."""

from __future__ import annotations

from dataclasses import dataclass

from .qsim import AnsatzSpec


@dataclass(frozen=True)
class HardwareProfile:
    t_1q: float  # single-qubit gate time, seconds
    t_2q: float  # two-qubit gate time, seconds
    overhead_c: float  # init + measurement + delays, seconds
    n_shots: int

    def __post_init__(self):
        if min(self.t_1q, self.t_2q, self.overhead_c) < 0:
            raise ValueError("gate times and overhead must be nonnegative")
        if self.n_shots < 1:
            raise ValueError("n_shots must be >= 1")


@dataclass(frozen=True)
class CircuitDepthProfile:
    d_1q: int  # sequential single-qubit gates on the critical path
    d_2q: int  # sequential two-qubit gates on the critical path
    n_params: int
    n_dataset: int

    def __post_init__(self):
        if min(self.d_1q, self.d_2q, self.n_params, self.n_dataset) < 0:
            raise ValueError("depth profile fields must be nonnegative")


def element_time(hw: HardwareProfile, depth: CircuitDepthProfile) -> float:
    """(d_1q*t_1q + d_2q*t_2q) * (2*n_params + 1) + C for one dataset element;
    the 2*n_params + 1 factor counts the parameter-shift circuits plus the
    forward evaluation."""
    circuit = depth.d_1q * hw.t_1q + depth.d_2q * hw.t_2q
    return circuit * (2 * depth.n_params + 1) + hw.overhead_c


def epoch_time(hw: HardwareProfile, depth: CircuitDepthProfile) -> float:
    """element_time * n_shots * n_dataset."""
    return element_time(hw, depth) * hw.n_shots * depth.n_dataset


def depth_from_ansatz(spec: AnsatzSpec, embedding_depth_1q: int | None = None,
                      embedding_depth_2q: int | None = None,
                      n_dataset: int = 1) -> CircuitDepthProfile:
    """Critical-path depths of the layered ansatz plus the embedding circuit.

    Each layer adds one Ry per qubit (depth 1) and a CNOT chain whose gates
    cannot run in parallel (gate k+1's control is gate k's target), so the
    chain contributes n_qubits - 1 sequential two-qubit gates.  Embedding
    depths default to the pessimistic 2**n_qubits bound since no explicit
    amplitude-embedding circuit is modeled.
    """
    if embedding_depth_1q is None:
        embedding_depth_1q = 2 ** spec.n_qubits
    if embedding_depth_2q is None:
        embedding_depth_2q = 2 ** spec.n_qubits
    d_1q = (spec.n_layers + 1) + embedding_depth_1q
    d_2q = spec.n_layers * (spec.n_qubits - 1) + embedding_depth_2q
    return CircuitDepthProfile(d_1q, d_2q, spec.n_params, n_dataset)
