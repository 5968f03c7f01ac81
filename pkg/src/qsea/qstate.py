"""Dense state-vector and density-matrix simulation kernel.

Qubit 0 is the most significant bit of the amplitude index everywhere in the
package, so ``|q0 q1 ... q_{n-1}>`` maps to index ``q0 * 2**(n-1) + ... + q_{n-1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateInputError, DimensionError, QubitIndexError

STATE_TOL = 1e-10
ARITH_TOL = 1e-12
PSD_TOL = 1e-9


def _check_register(register: Sequence[int], n_qubits: int, allow_empty: bool = False) -> tuple[int, ...]:
    reg = tuple(int(q) for q in register)
    if not reg and not allow_empty:
        raise QubitIndexError("qubit register must not be empty")
    if len(set(reg)) != len(reg):
        raise QubitIndexError(f"duplicate qubit indices in {reg}")
    for q in reg:
        if q < 0 or q >= n_qubits:
            raise QubitIndexError(f"qubit {q} out of range for {n_qubits} qubits")
    return reg


def _n_from_dim(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or (1 << n) != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalised pure state over ``n_qubits`` qubits."""

    n_qubits: int
    amps: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amps, dtype=np.complex128).reshape(-1)
        if self.n_qubits < 1 or amps.size != 2**self.n_qubits:
            raise DimensionError(f"expected {2 ** self.n_qubits} amplitudes, got {amps.size}")
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > STATE_TOL:
            raise DimensionError(f"state is not normalised (norm^2 = {norm})")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def __repr__(self):
        return f"StateVector(n_qubits={self.n_qubits}, amps={np.array2string(self.amps, precision=4)})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Trace-one Hermitian PSD operator over ``n_qubits`` qubits."""

    n_qubits: int
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=np.complex128)
        d = 2**self.n_qubits
        if self.n_qubits < 1 or rho.shape != (d, d):
            raise DimensionError(f"expected a {d}x{d} matrix, got shape {rho.shape}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    def trace(self) -> complex:
        return complex(np.trace(self.rho))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.rho, self.rho)))

    def is_valid(self, tol: float = STATE_TOL) -> bool:
        """Check trace, Hermiticity and positivity."""
        if abs(self.trace() - 1.0) > tol:
            return False
        if np.max(np.abs(self.rho - self.rho.conj().T)) > tol:
            return False
        return bool(np.linalg.eigvalsh(self.rho).min() >= -PSD_TOL)


@dataclass(frozen=True, eq=False)
class Gate:
    """A named unitary acting on ``arity`` qubits."""

    name: str
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"gate matrix must be square, got {m.shape}")
        _n_from_dim(m.shape[0])
        if np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) > STATE_TOL:
            raise DimensionError(f"gate {self.name} is not unitary")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return _n_from_dim(self.matrix.shape[0])

    def dagger(self) -> "Gate":
        return Gate(self.name + "_dg", self.matrix.conj().T)


@dataclass(frozen=True)
class Op:
    """A gate placed on concrete qubits. ``param`` indexes the angle vector that produced it."""

    gate: Gate
    targets: tuple[int, ...]
    param: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if len(self.targets) != self.gate.arity:
            raise QubitIndexError(
                f"gate {self.gate.name} has arity {self.gate.arity} but got targets {self.targets}"
            )


# -- standard gates -----------------------------------------------------------

_S2 = 1 / np.sqrt(2)
I2 = np.eye(2, dtype=np.complex128)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)

H = Gate("H", np.array([[_S2, _S2], [_S2, -_S2]]))
X = Gate("X", PAULI_X)
Y = Gate("Y", PAULI_Y)
Z = Gate("Z", PAULI_Z)
CNOT = Gate("CNOT", np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]]))
CZ = Gate("CZ", np.diag([1, 1, 1, -1]))
SWAP = Gate("SWAP", np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]))
_cswap = np.eye(8)
_cswap[[5, 6]] = _cswap[[6, 5]]
CSWAP = Gate("CSWAP", _cswap)


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz_matrix(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def controlled(u: np.ndarray) -> np.ndarray:
    """Block-diagonal ``|0><0| (x) I + |1><1| (x) u`` with the control as first target."""
    d = u.shape[0]
    out = np.eye(2 * d, dtype=np.complex128)
    out[d:, d:] = u
    return out


def RY(theta: float) -> Gate:
    return Gate("RY", ry_matrix(theta))


def RZ(theta: float) -> Gate:
    return Gate("RZ", rz_matrix(theta))


def CRY(theta: float) -> Gate:
    return Gate("CRY", controlled(ry_matrix(theta)))


# -- construction -------------------------------------------------------------


def make_state(n_qubits: int, amps) -> StateVector:
    """Build a state from raw amplitudes, rescaling to unit L2 norm."""
    a = np.asarray(amps, dtype=np.complex128).reshape(-1)
    if n_qubits < 1 or a.size != 2**n_qubits:
        raise DimensionError(f"expected {2 ** n_qubits} amplitudes for {n_qubits} qubits, got {a.size}")
    norm = np.linalg.norm(a)
    if norm == 0.0 or not np.isfinite(norm):
        raise DegenerateInputError("cannot normalise an all-zero amplitude vector")
    return StateVector(n_qubits, a / norm)


def basis_state(n_qubits: int, index: int = 0) -> StateVector:
    a = np.zeros(2**n_qubits, dtype=np.complex128)
    a[index] = 1.0
    return StateVector(n_qubits, a)


def tensor(a: StateVector, b: StateVector) -> StateVector:
    """Kronecker product with ``a`` as the most significant register."""
    return StateVector(a.n_qubits + b.n_qubits, np.kron(a.amps, b.amps))


def to_density(state: StateVector) -> DensityMatrix:
    return DensityMatrix(state.n_qubits, np.outer(state.amps, state.amps.conj()))


# -- array-level kernels (operate on the last axis, leading axes are batch) ---


def _apply_two(t: np.ndarray, g: np.ndarray) -> np.ndarray:
    # t[..., A, i, B, j, C]; sums only the nonzero entries of g so CZ/CRY stay cheap
    x = [[t[..., :, k, :, l, :] for l in range(2)] for k in range(2)]
    out = np.empty_like(t)
    for i in range(2):
        for j in range(2):
            acc = None
            for k in range(2):
                for l in range(2):
                    c = g[i, j, k, l]
                    if c != 0:
                        term = x[k][l] if c == 1 else c * x[k][l]
                        acc = term if acc is None else acc + term
            out[..., :, i, :, j, :] = 0 if acc is None else acc
    return out


def apply_matrix(vec: np.ndarray, matrix: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """Apply a ``2^k x 2^k`` matrix to ``targets`` of every vector in ``vec[..., 2**n]``.

    Never materialises the full ``2^n x 2^n`` operator.
    """
    k = len(targets)
    batch = vec.shape[:-1]
    if k == 1:
        q = targets[0]
        t = vec.reshape(batch + (2**q, 2, 2 ** (n_qubits - q - 1)))
        if t.shape[-1] >= 8:
            return np.matmul(matrix, t).reshape(vec.shape)
        # tiny trailing stride: explicit 2x2 combination beats batched matmul
        x0, x1 = t[..., 0, :], t[..., 1, :]
        out = np.empty_like(t)
        for i in range(2):
            a, b = matrix[i, 0], matrix[i, 1]
            if b == 0:
                np.multiply(x0, a, out=out[..., i, :])
            elif a == 0:
                np.multiply(x1, b, out=out[..., i, :])
            else:
                np.multiply(x0, a, out=out[..., i, :])
                out[..., i, :] += b * x1
        return out.reshape(vec.shape)
    if k == 2:
        a, b = targets
        lo, hi = min(a, b), max(a, b)
        t = vec.reshape(batch + (2**lo, 2, 2 ** (hi - lo - 1), 2, 2 ** (n_qubits - hi - 1)))
        g = matrix.reshape(2, 2, 2, 2)
        if a > b:
            g = g.transpose(1, 0, 3, 2)
        return _apply_two(t, g).reshape(vec.shape)
    off = len(batch)
    t = vec.reshape(batch + (2,) * n_qubits)
    axes = [off + q for q in targets]
    g = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(t, g, axes=(axes, list(range(k, 2 * k))))
    out = np.moveaxis(out, list(range(out.ndim - k, out.ndim)), axes)
    return out.reshape(vec.shape)


def apply_matrix_density(rho: np.ndarray, matrix: np.ndarray, targets: Sequence[int], n_qubits: int) -> np.ndarray:
    """``U rho U^dagger`` for ``rho[..., d, d]`` with ``U`` embedded on ``targets``."""
    # rows and columns are treated as one 2n-qubit register
    flat = rho.reshape(rho.shape[:-2] + (-1,))
    flat = apply_matrix(flat, matrix, targets, 2 * n_qubits)
    flat = apply_matrix(flat, matrix.conj(), [t + n_qubits for t in targets], 2 * n_qubits)
    return flat.reshape(rho.shape)


def run_ops(vec: np.ndarray, ops: Iterable[Op], n_qubits: int) -> np.ndarray:
    for op in ops:
        vec = apply_matrix(vec, op.gate.matrix, op.targets, n_qubits)
    return vec


def inverse_ops(ops: Sequence[Op]) -> list[Op]:
    """Ops realising the adjoint of the circuit ``ops``."""
    return [Op(op.gate.dagger(), op.targets) for op in reversed(ops)]


# -- value-level operations ---------------------------------------------------


def apply_gate(state: StateVector, gate: Gate, targets: Sequence[int]) -> StateVector:
    reg = _check_register(targets, state.n_qubits)
    if len(reg) != gate.arity:
        raise QubitIndexError(f"gate {gate.name} has arity {gate.arity}, got {len(reg)} targets")
    return StateVector(state.n_qubits, apply_matrix(state.amps, gate.matrix, reg, state.n_qubits))


def run_circuit(state: StateVector, ops: Iterable[Op]) -> StateVector:
    ops = list(ops)
    for op in ops:
        _check_register(op.targets, state.n_qubits)
    return StateVector(state.n_qubits, run_ops(state.amps, ops, state.n_qubits))


def apply_gate_density(rho: DensityMatrix, gate: Gate, targets: Sequence[int]) -> DensityMatrix:
    reg = _check_register(targets, rho.n_qubits)
    if len(reg) != gate.arity:
        raise QubitIndexError(f"gate {gate.name} has arity {gate.arity}, got {len(reg)} targets")
    return DensityMatrix(rho.n_qubits, apply_matrix_density(rho.rho, gate.matrix, reg, rho.n_qubits))


def partial_trace_array(rho: np.ndarray, keep: Sequence[int], n_qubits: int) -> np.ndarray:
    """Reduced matrix on ``keep`` (in the given order) for ``rho[..., d, d]``."""
    batch = rho.shape[:-2]
    nb = len(batch)
    t = rho.reshape(batch + (2,) * (2 * n_qubits))
    letters = [chr(c) for c in range(ord("a"), ord("z") + 1)] + [chr(c) for c in range(ord("A"), ord("Z") + 1)]
    b_idx = letters[:nb]
    row = letters[nb:nb + n_qubits]
    col = list(row)
    spare = iter(letters[nb + n_qubits:])
    for q in keep:
        col[q] = next(spare)
    out = b_idx + [row[q] for q in keep] + [col[q] for q in keep]
    spec = "".join(b_idx + row + col) + "->" + "".join(out)
    red = np.einsum(spec, t)
    d = 2 ** len(keep)
    return red.reshape(batch + (d, d))


def partial_trace(rho: DensityMatrix, keep: Sequence[int]) -> DensityMatrix:
    """Trace out every qubit not in ``keep``; kept qubits appear in the order given."""
    reg = _check_register(keep, rho.n_qubits)
    return DensityMatrix(len(reg), partial_trace_array(rho.rho, reg, rho.n_qubits))


def measure_probs(state: StateVector, register: Sequence[int]) -> np.ndarray:
    """Born-rule marginal distribution of ``register`` (first listed qubit most significant)."""
    reg = _check_register(register, state.n_qubits)
    n = state.n_qubits
    p = (np.abs(state.amps) ** 2).reshape((2,) * n)
    rest = tuple(q for q in range(n) if q not in reg)
    marg = p.sum(axis=rest) if rest else p
    # remaining axes are in ascending qubit order; reorder to match ``reg``
    remaining = sorted(reg)
    marg = np.transpose(marg, [remaining.index(q) for q in reg])
    return marg.reshape(-1)
