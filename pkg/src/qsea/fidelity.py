"""Fidelity between quantum states: exact values and shot-based estimators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, ParameterError
from .qstate import (
    CSWAP,
    H,
    DensityMatrix,
    Op,
    StateVector,
    inverse_ops,
    run_ops,
)

Rep = StateVector | DensityMatrix


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    shots: int = 0
    std_err: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ParameterError(f"fidelity {self.value} outside [0, 1]")
        if self.shots == 0 and self.std_err != 0.0:
            raise ParameterError("exact estimates carry no standard error")


def derive_seed(root_seed: int, index: int) -> int:
    """Seed for the ``index``-th parallel estimate under ``root_seed``."""
    return int(root_seed) ^ int(index)


def _clamp01(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


def _same_size(a: Rep, b: Rep) -> None:
    if a.n_qubits != b.n_qubits:
        raise DimensionError(f"register sizes differ: {a.n_qubits} vs {b.n_qubits}")


def exact_fidelity(a: StateVector, b: StateVector) -> float:
    """``|<a|b>|^2``."""
    _same_size(a, b)
    return _clamp01(abs(np.vdot(a.amps, b.amps)) ** 2)


def pure_mixed_fidelity(a: StateVector, rho: DensityMatrix) -> float:
    """``<a|rho|a>``."""
    _same_size(a, rho)
    return _clamp01(np.real(np.vdot(a.amps, rho.rho @ a.amps)))


def state_overlap(x: Rep, y: Rep) -> float:
    """``Tr(rho sigma)`` for any mix of pure and mixed inputs.

    This is the quantity a swap test reports. It equals the fidelity whenever at
    least one side is pure.
    """
    _same_size(x, y)
    if isinstance(x, StateVector) and isinstance(y, StateVector):
        return exact_fidelity(x, y)
    if isinstance(x, StateVector):
        return pure_mixed_fidelity(x, y)
    if isinstance(y, StateVector):
        return pure_mixed_fidelity(y, x)
    return _clamp01(np.real(np.vdot(x.rho, y.rho)))


def overlap_matrix(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Pairwise ``Tr(rho_i sigma_j)`` for stacks of state vectors ``[N, d]`` or densities ``[N, d, d]``."""
    xs, ys = np.asarray(xs), np.asarray(ys)
    if xs.ndim == 2 and ys.ndim == 2:
        return np.abs(xs.conj() @ ys.T) ** 2
    if xs.ndim == 2:
        return np.real(np.einsum("ni,mij,nj->nm", xs.conj(), ys, xs))
    if ys.ndim == 2:
        return overlap_matrix(ys, xs).T
    n, d = xs.shape[0], xs.shape[-1]
    return np.real(xs.reshape(n, d * d).conj() @ ys.reshape(ys.shape[0], d * d).T)


# -- swap test ----------------------------------------------------------------


def _purify(x: Rep) -> tuple[np.ndarray, int]:
    """Amplitudes of a purification of ``x`` and the number of purifying qubits."""
    if isinstance(x, StateVector):
        return x.amps, 0
    w, v = np.linalg.eigh(x.rho)
    keep = w > 1e-14
    w, v = w[keep], v[:, keep]
    r = int(np.ceil(np.log2(len(w)))) if len(w) > 1 else 0
    joint = np.zeros((x.dim, 2**r), dtype=np.complex128)
    joint[:, : len(w)] = v * np.sqrt(w)
    joint = joint.reshape(-1)
    return joint / np.linalg.norm(joint), r


def swap_test_ops(n: int) -> list[Op]:
    """Ancilla 0, register A on qubits 1..n, register B on n+1..2n."""
    ops = [Op(H, (0,))]
    ops += [Op(CSWAP, (0, 1 + k, 1 + n + k)) for k in range(n)]
    ops.append(Op(H, (0,)))
    return ops


def swap_test_p0(a: Rep, b: Rep) -> float:
    """Probability of reading 0 on the swap-test ancilla, by simulating the circuit.

    Mixed inputs are replaced by minimal purifications whose purifying qubits sit
    below register B and are never touched by the controlled swaps.
    """
    _same_size(a, b)
    n = a.n_qubits
    pa, ra = _purify(a)
    pb, rb = _purify(b)
    if ra:
        # move A's purifier after B so A's data qubits stay contiguous
        reg_a = pa.reshape(2**n, 2**ra)
        joint = np.einsum("ip,j->ijp", reg_a, pb).reshape(-1)
    else:
        joint = np.kron(pa, pb)
    total = 1 + 2 * n + ra + rb
    psi = np.zeros(2 * joint.size, dtype=np.complex128)
    psi[: joint.size] = joint
    psi = run_ops(psi, swap_test_ops(n), total)
    return float(np.sum(np.abs(psi[: joint.size]) ** 2))


def _sample_p(p: float, shots: int, seed: int) -> int:
    if shots < 1:
        raise ParameterError("shots must be positive")
    rng = np.random.default_rng(seed)
    return int(rng.binomial(shots, min(1.0, max(0.0, p))))


def swap_test_from_p0(p0: float, shots: int, seed: int) -> FidelityEstimate:
    """Sample ``shots`` ancilla readouts with ``P(0) = p0`` and invert ``P(0) = (1 + F) / 2``."""
    zeros = _sample_p(p0, shots, seed)
    raw = 2.0 * zeros / shots - 1.0
    # the estimator 2k/s - 1 has variance (1 - F^2) / s
    se = max(np.sqrt(max(0.0, 1.0 - raw * raw) / shots), 1.0 / shots)
    return FidelityEstimate(_clamp01(raw), shots, float(se))


def swap_test_estimate(a: Rep, b: Rep, shots: int, seed: int) -> FidelityEstimate:
    return swap_test_from_p0(swap_test_p0(a, b), shots, seed)


# -- compute-uncompute --------------------------------------------------------


def compute_uncompute_p0(prep_a: Sequence[Op], prep_b: Sequence[Op], n: int) -> float:
    """``P(0...0)`` after running ``prep_a`` then ``prep_b^dagger`` from ``|0...0>``."""
    for op in list(prep_a) + list(prep_b):
        if any(t < 0 or t >= n for t in op.targets):
            raise DimensionError(f"op {op.gate.name} on {op.targets} does not fit {n} qubits")
    psi = np.zeros(2**n, dtype=np.complex128)
    psi[0] = 1.0
    psi = run_ops(psi, list(prep_a) + inverse_ops(list(prep_b)), n)
    return float(abs(psi[0]) ** 2)


def compute_uncompute_estimate(
    prep_a: Sequence[Op], prep_b: Sequence[Op], n: int, shots: int, seed: int
) -> FidelityEstimate:
    zeros = _sample_p(compute_uncompute_p0(prep_a, prep_b, n), shots, seed)
    value = zeros / shots
    se = max(np.sqrt(value * (1.0 - value) / shots), 1.0 / shots)
    return FidelityEstimate(_clamp01(value), shots, float(se))
