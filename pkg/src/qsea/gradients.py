"""Parameter-shift and finite-difference gradients.

Shift rules differentiate expectation values. The contrastive loss is a
non-linear function of such expectations, so its gradient is assembled by the
chain rule from shift-rule gradients of the positive fidelities.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .augment import EaParams, append_ancilla, build_ea_circuit
from .errors import UnsupportedGateError
from .losses import LossWeights, Triplet, as_amplitudes, loss_f1, loss_f2, total_loss
from .qstate import apply_matrix, controlled, ry_matrix, rz_matrix

_C_NEAR = (np.sqrt(2) + 1) / (4 * np.sqrt(2))
_C_FAR = (np.sqrt(2) - 1) / (4 * np.sqrt(2))

# (coefficient, shift) pairs; d f / d theta = sum c * f(theta + s)
TWO_TERM = ((0.5, np.pi / 2), (-0.5, -np.pi / 2))
# gates whose generator has eigenvalues {0, +-1/2}, e.g. controlled rotations
FOUR_TERM = (
    (_C_NEAR, np.pi / 2),
    (-_C_NEAR, -np.pi / 2),
    (-_C_FAR, 3 * np.pi / 2),
    (_C_FAR, -3 * np.pi / 2),
)

SHIFT_RULES = {"RY": TWO_TERM, "RZ": TWO_TERM, "RX": TWO_TERM, "CRY": FOUR_TERM}

_GATE_AT = {
    "RY": ry_matrix,
    "RZ": rz_matrix,
    "CRY": lambda t: controlled(ry_matrix(t)),
}


def shift_rule(gate_name: str):
    try:
        return SHIFT_RULES[gate_name]
    except KeyError:
        raise UnsupportedGateError(f"no parameter-shift rule for gate {gate_name!r}") from None


def parameter_shift_grad(
    loss: Callable[[np.ndarray], float],
    theta,
    gates: Sequence[str] | None = None,
) -> np.ndarray:
    """Gradient of an expectation-valued ``loss`` by evaluating it at shifted angles.

    ``gates`` names the gate family fed by each angle (default: single-qubit
    rotations everywhere). Shifted points are not projected back into any
    parameter domain.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if gates is None:
        gates = ["RY"] * theta.size
    rules = [shift_rule(g) for g in gates]
    grad = np.zeros_like(theta)
    for k, rule in enumerate(rules):
        for c, s in rule:
            shifted = theta.copy()
            shifted[k] += s
            grad[k] += c * loss(shifted)
    return grad


def finite_diff_grad(loss: Callable[[np.ndarray], float], theta, h: float = 1e-5) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    grad = np.zeros_like(theta)
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        grad[k] = (loss(theta + e) - loss(theta - e)) / (2 * h)
    return grad


def positive_fidelity_grad(anchors: np.ndarray, p: EaParams) -> tuple[np.ndarray, np.ndarray]:
    """Positive fidelities ``[B]`` and their shift-rule gradients ``[B, P]``.

    Every shifted circuit differs from the unshifted one in a single gate, so
    ``f(theta + s e_k) = sum_j |<m_j^k| G_k(s) phi_k>|^2`` where ``phi_k`` is the
    forward state just after gate ``k`` and ``m_j^k`` is ``|a, j>`` pulled back
    through the gates after ``k``. One forward and one backward sweep give the
    exact values the shift rules would obtain from separate circuit runs.
    """
    anchors = np.asarray(anchors, dtype=np.complex128)
    circ = build_ea_circuit(p)
    for name in circ.param_gates:
        shift_rule(name)
    n = p.n_data + 1
    b = anchors.shape[0]

    states = [append_ancilla(anchors)]
    for op in circ.ops:
        states.append(apply_matrix(states[-1], op.gate.matrix, op.targets, n))

    # m[:, j] = |a> (x) |j>
    m = np.zeros((b, 2, 2**p.n_data, 2), dtype=np.complex128)
    m[:, 0, :, 0] = anchors
    m[:, 1, :, 1] = anchors
    m = m.reshape(b, 2, 2**n)

    final = states[-1]
    fid = np.sum(np.abs(np.einsum("bjd,bd->bj", m.conj(), final)) ** 2, axis=1)

    grad = np.zeros((b, p.theta.size))
    for k in range(len(circ.ops) - 1, -1, -1):
        op = circ.ops[k]
        if op.param is not None:
            name = circ.param_gates[op.param]
            phi = states[k + 1]
            for c, s in SHIFT_RULES[name]:
                moved = apply_matrix(phi, _GATE_AT[name](s), op.targets, n)
                val = np.sum(np.abs(np.einsum("bjd,bd->bj", m.conj(), moved)) ** 2, axis=1)
                grad[:, op.param] += c * val
        m = apply_matrix(m, op.gate.matrix.conj().T, op.targets, n)
    return np.clip(fid, 0.0, 1.0), grad


def batch_loss_and_grad(samples, triplets: Sequence[Triplet], p: EaParams, w: LossWeights):
    """Exact-mode ``(total, l_f1, l_f2, d total / d theta)`` for one triplet batch."""
    amps = as_amplitudes(samples)
    a_idx = np.array([t.anchor_id for t in triplets])
    n_idx = np.array([t.negative_id for t in triplets])
    anchors = amps[a_idx]
    fp, dfp = positive_fidelity_grad(anchors, p)
    fn = np.clip(np.abs(np.sum(anchors.conj() * amps[n_idx], axis=1)) ** 2, 0.0, 1.0)
    l1, l2 = loss_f1(fp, w.eps), loss_f2(fn)
    # d/dF of 1 / (1 - F + eps); negatives do not depend on theta
    weights = 1.0 / (1.0 - fp + w.eps) ** 2
    grad = -w.alpha * (weights @ dfp) / len(triplets)
    return total_loss(l1, l2, w), l1, l2, grad
