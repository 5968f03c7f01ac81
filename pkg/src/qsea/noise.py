"""Single-qubit Kraus channels and noisy density-matrix execution."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import RangeError, QubitIndexError
from .qstate import (
    ARITH_TOL,
    I2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DensityMatrix,
    Op,
    apply_matrix,
    apply_matrix_density,
)

_PAULIS = (I2, PAULI_X, PAULI_Z, PAULI_Y)  # indexed by (x_bit | z_bit << 1)


@dataclass(frozen=True, eq=False)
class KrausChannel:
    name: str
    kraus_ops: tuple[np.ndarray, ...]
    p: float = 0.0

    def __post_init__(self):
        ops = tuple(np.array(k, dtype=np.complex128) for k in self.kraus_ops)
        object.__setattr__(self, "kraus_ops", ops)

    def completeness_error(self) -> float:
        total = sum(k.conj().T @ k for k in self.kraus_ops)
        return float(np.max(np.abs(total - I2)))

    def pauli_weights(self) -> np.ndarray | None:
        """Weights ``(w_I, w_X, w_Z, w_Y)`` if every Kraus operator is a scaled Pauli, else ``None``."""
        w = np.zeros(4)
        for k in self.kraus_ops:
            coeffs = np.array([np.trace(P.conj().T @ k) / 2 for P in _PAULIS])
            big = np.abs(coeffs) > 1e-15
            if big.sum() > 1:
                return None
            if big.any():
                idx = int(np.argmax(big))
                w[idx] += abs(coeffs[idx]) ** 2
        return w


def _check_p(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise RangeError(f"probability {p} outside [0, 1]")
    return p


def _ops(*pairs) -> tuple[np.ndarray, ...]:
    # zero-weight operators are dropped so p = 0 leaves only the identity
    return tuple(np.sqrt(w) * m for w, m in pairs if w > 0)


def bit_flip(p: float) -> KrausChannel:
    p = _check_p(p)
    return KrausChannel("bit_flip", _ops((1 - p, I2), (p, PAULI_X)), p)


def phase_flip(p: float) -> KrausChannel:
    p = _check_p(p)
    return KrausChannel("phase_flip", _ops((1 - p, I2), (p, PAULI_Z)), p)


def depolarizing(p: float) -> KrausChannel:
    """``rho -> (1 - p) rho + p I / 2``."""
    p = _check_p(p)
    q = p / 4
    return KrausChannel("depolarizing", _ops((1 - 3 * q, I2), (q, PAULI_X), (q, PAULI_Y), (q, PAULI_Z)), p)


CHANNELS = {"bit_flip": bit_flip, "phase_flip": phase_flip, "depolarizing": depolarizing}


@dataclass(frozen=True)
class NoiseModel:
    """Channels applied, in order, to each qubit an executed gate touches."""

    channels: tuple[KrausChannel, ...] = field(default=())
    placement: str = "after_gate"

    @classmethod
    def composite(cls, p: float = 0.01) -> "NoiseModel":
        return cls((bit_flip(p), phase_flip(p), depolarizing(p)))

    @classmethod
    def from_spec(cls, names: Iterable[str], p: float) -> "NoiseModel":
        try:
            return cls(tuple(CHANNELS[n](p) for n in names))
        except KeyError as exc:
            raise RangeError(f"unknown channel {exc.args[0]!r}") from None

    @property
    def is_empty(self) -> bool:
        return not self.channels

    def pauli_weights(self) -> np.ndarray | None:
        """Weights of the single Pauli channel equal to the whole per-qubit sequence."""
        total = np.array([1.0, 0.0, 0.0, 0.0])
        for ch in self.channels:
            w = ch.pauli_weights()
            if w is None:
                return None
            nxt = np.zeros(4)
            for a in range(4):
                for b in range(4):
                    nxt[a ^ b] += total[a] * w[b]
            total = nxt
        return total


def _kraus_array(rho: np.ndarray, ch: KrausChannel, qubit: int, n: int) -> np.ndarray:
    return sum(apply_matrix_density(rho, k, [qubit], n) for k in ch.kraus_ops)


def _pauli_array(rho: np.ndarray, w: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """``sum_P w_P P rho P`` via the 2x2 block structure of ``qubit``.

    With ``rho_ab`` the block for row bit ``a`` and column bit ``b`` of ``qubit``:
    ``rho'_ab = (w_I + s w_Z) rho_ab + (w_X + s w_Y) rho_{1-a,1-b}``, ``s = (-1)^(a+b)``.
    """
    w_i, w_x, w_z, w_y = w
    batch = rho.shape[:-2]
    hi, lo = 2**qubit, 2 ** (n - qubit - 1)
    t = rho.reshape(batch + (hi, 2, lo, hi, 2, lo))
    out = np.empty_like(t)
    for a in (0, 1):
        for b in (0, 1):
            if a == b:
                keep, swap = w_i + w_z, w_x + w_y
            else:
                keep, swap = w_i - w_z, w_x - w_y
            dst = out[..., a, :, :, b, :]
            np.multiply(t[..., a, :, :, b, :], keep, out=dst)
            if swap != 0:
                dst += swap * t[..., 1 - a, :, :, 1 - b, :]
    return out.reshape(rho.shape)


def apply_channel(rho: DensityMatrix, ch: KrausChannel, qubit: int) -> DensityMatrix:
    """``sum_k K_k rho K_k^dagger`` with every ``K_k`` acting on ``qubit``."""
    if not 0 <= qubit < rho.n_qubits:
        raise QubitIndexError(f"qubit {qubit} out of range for {rho.n_qubits} qubits")
    return DensityMatrix(rho.n_qubits, _kraus_array(rho.rho, ch, qubit, rho.n_qubits))


def noisy_execute_array(ops: Sequence[Op], rho: np.ndarray, model: NoiseModel, n: int) -> np.ndarray:
    """Array form of :func:`noisy_execute`; ``rho`` may carry leading batch axes."""
    w = model.pauli_weights()
    for op in ops:
        rho = apply_matrix_density(rho, op.gate.matrix, op.targets, n)
        if model.is_empty:
            continue
        for q in op.targets:
            if w is not None:
                rho = _pauli_array(rho, w, q, n)
            else:
                for ch in model.channels:
                    rho = _kraus_array(rho, ch, q, n)
    return rho


def noisy_adjoint_array(ops: Sequence[Op], y: np.ndarray, model: NoiseModel, n: int) -> np.ndarray:
    """Heisenberg-picture adjoint of :func:`noisy_execute_array`.

    Satisfies ``Tr(E(rho) Y) = Tr(rho E^dagger(Y))`` for the noisy map ``E``.
    """
    w = model.pauli_weights()
    for op in reversed(list(ops)):
        if not model.is_empty:
            for q in reversed(op.targets):
                if w is not None:
                    y = _pauli_array(y, w, q, n)
                else:
                    for ch in reversed(model.channels):
                        y = sum(apply_matrix_density(y, k.conj().T, [q], n) for k in ch.kraus_ops)
        y = apply_matrix_density(y, op.gate.matrix.conj().T, op.targets, n)
    return y


def noisy_execute(circuit: Sequence[Op], rho_in: DensityMatrix, model: NoiseModel) -> DensityMatrix:
    """Run ``circuit`` as ``rho -> U rho U^dagger``, then the model's channels on each touched qubit."""
    n = rho_in.n_qubits
    for op in circuit:
        if any(t < 0 or t >= n for t in op.targets):
            raise QubitIndexError(f"op {op.gate.name} on {op.targets} does not fit {n} qubits")
    return DensityMatrix(n, noisy_execute_array(list(circuit), rho_in.rho, model, n))


def pure_execute_density(circuit: Sequence[Op], rho_in: DensityMatrix) -> DensityMatrix:
    """Noiseless reference: evolve each eigenvector of ``rho_in`` as a pure state."""
    n = rho_in.n_qubits
    w, v = np.linalg.eigh(rho_in.rho)
    out = np.zeros_like(rho_in.rho)
    for lam, vec in zip(w, v.T):
        if lam > ARITH_TOL:
            for op in circuit:
                vec = apply_matrix(vec, op.gate.matrix, op.targets, n)
            out += lam * np.outer(vec, vec.conj())
    return DensityMatrix(n, out)
