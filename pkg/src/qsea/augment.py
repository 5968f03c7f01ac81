"""Entanglement-based augmentation (EA).

An ancilla is appended as the least significant qubit, put into ``|+>`` with a
Hadamard, and then ``layers`` repetitions of the following block are applied:

1. ``RY`` followed by ``RZ`` on every qubit (data qubits first, ancilla last),
2. an ancilla-controlled ``RY`` on each data qubit,
3. a ring of ``CZ`` gates over neighbouring data qubits.

Angles are read from ``theta`` in exactly that order, layer by layer, so each
layer consumes ``2 * (n_data + 1) + n_data`` angles and each angle feeds one gate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError
from .qstate import (
    CRY,
    CZ,
    RY,
    RZ,
    H,
    DensityMatrix,
    Op,
    StateVector,
    partial_trace_array,
    run_ops,
)

THETA_MIN = 0.0
THETA_MAX = np.pi / 2


def params_per_layer(n_data: int) -> int:
    return 3 * n_data + 2


def n_params(n_data: int, layers: int) -> int:
    return layers * params_per_layer(n_data)


def ring_pairs(n_data: int) -> list[tuple[int, int]]:
    """CZ pairs of the entangling ring: none for one qubit, a single CZ for two."""
    if n_data < 2:
        return []
    if n_data == 2:
        return [(0, 1)]
    return [(i, (i + 1) % n_data) for i in range(n_data)]


@dataclass(frozen=True, eq=False)
class EaParams:
    n_data: int
    layers: int
    theta: np.ndarray

    def __post_init__(self):
        th = np.array(self.theta, dtype=np.float64).reshape(-1)
        if self.n_data < 1 or self.layers < 1:
            raise ParameterError("n_data and layers must be positive")
        expected = n_params(self.n_data, self.layers)
        if th.size != expected:
            raise ParameterError(f"expected {expected} angles for n_data={self.n_data}, layers={self.layers}; got {th.size}")
        if np.any(th < THETA_MIN) or np.any(th > THETA_MAX):
            raise ParameterError("every angle must lie in [0, pi/2]")
        th.setflags(write=False)
        object.__setattr__(self, "theta", th)

    def with_theta(self, theta) -> "EaParams":
        return EaParams(self.n_data, self.layers, theta)

    @classmethod
    def zeros(cls, n_data: int, layers: int = 2) -> "EaParams":
        return cls(n_data, layers, np.zeros(n_params(n_data, layers)))

    @classmethod
    def random(cls, n_data: int, layers: int = 2, rng: np.random.Generator | int | None = None) -> "EaParams":
        rng = np.random.default_rng(rng)
        return cls(n_data, layers, rng.uniform(THETA_MIN, THETA_MAX, n_params(n_data, layers)))


def project_theta(theta: np.ndarray) -> np.ndarray:
    return np.clip(theta, THETA_MIN, THETA_MAX)


@dataclass(frozen=True)
class EaCircuit:
    n_data: int
    ops: tuple[Op, ...]
    # gate family of each angle, indexed like ``theta``
    param_gates: tuple[str, ...] = field(default=())

    @property
    def ancilla(self) -> int:
        return self.n_data

    @property
    def n_qubits(self) -> int:
        return self.n_data + 1


def _build_ops(n_data: int, layers: int, theta) -> tuple[list[Op], list[str]]:
    anc = n_data
    ops = [Op(H, (anc,))]
    kinds: list[str] = []
    k = 0
    for _ in range(layers):
        for q in range(n_data + 1):
            ops.append(Op(RY(theta[k]), (q,), k))
            ops.append(Op(RZ(theta[k + 1]), (q,), k + 1))
            kinds += ["RY", "RZ"]
            k += 2
        for q in range(n_data):
            ops.append(Op(CRY(theta[k]), (anc, q), k))
            kinds.append("CRY")
            k += 1
        for a, b in ring_pairs(n_data):
            ops.append(Op(CZ, (a, b)))
    return ops, kinds


def build_ea_circuit(p: EaParams) -> EaCircuit:
    ops, kinds = _build_ops(p.n_data, p.layers, p.theta)
    return EaCircuit(p.n_data, tuple(ops), tuple(kinds))


def append_ancilla(anchors: np.ndarray) -> np.ndarray:
    """``|a> (x) |0>`` for every row of ``anchors[..., 2**n]``."""
    out = np.zeros(anchors.shape + (2,), dtype=np.complex128)
    out[..., 0] = anchors
    return out.reshape(anchors.shape[:-1] + (2 * anchors.shape[-1],))


def augment_batch(anchors: np.ndarray, p: EaParams) -> np.ndarray:
    """Positive samples for a batch of anchor amplitudes ``[B, 2**n_data]``."""
    if anchors.shape[-1] != 2**p.n_data:
        raise DimensionError(f"anchors have dimension {anchors.shape[-1]}, expected {2 ** p.n_data}")
    circ = build_ea_circuit(p)
    return run_ops(append_ancilla(np.asarray(anchors, dtype=np.complex128)), circ.ops, p.n_data + 1)


def augment_state(psi_a: StateVector, p: EaParams) -> StateVector:
    if psi_a.n_qubits != p.n_data:
        raise DimensionError(f"state has {psi_a.n_qubits} qubits, augmentation expects {p.n_data}")
    return StateVector(p.n_data + 1, augment_batch(psi_a.amps, p))


def reduced_data_states(psi_p: np.ndarray, n_data: int) -> np.ndarray:
    """Tr over the ancilla for ``psi_p[..., 2**(n_data+1)]`` -> ``[..., d, d]``."""
    v = psi_p.reshape(psi_p.shape[:-1] + (2**n_data, 2))
    return np.einsum("...ia,...ja->...ij", v, v.conj())


def positive_reduced(psi_p: StateVector, n_data: int) -> DensityMatrix:
    if psi_p.n_qubits != n_data + 1:
        raise DimensionError(f"expected {n_data + 1} qubits, got {psi_p.n_qubits}")
    rho = partial_trace_array(np.outer(psi_p.amps, psi_p.amps.conj()), list(range(n_data)), n_data + 1)
    return DensityMatrix(n_data, rho)


def positive_fidelity_batch(anchors: np.ndarray, p: EaParams) -> np.ndarray:
    """``<a| Tr_anc |psi_P><psi_P| |a>`` for each anchor row."""
    anchors = np.asarray(anchors, dtype=np.complex128)
    v = augment_batch(anchors, p).reshape(anchors.shape[:-1] + (2**p.n_data, 2))
    overlaps = np.einsum("...i,...ia->...a", anchors.conj(), v)
    return np.sum(np.abs(overlaps) ** 2, axis=-1)
