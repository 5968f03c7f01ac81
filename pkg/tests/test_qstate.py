import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracle import embed, partial_trace_loops, random_amps, random_unitary
from qsea.errors import DegenerateInputError, DimensionError, QubitIndexError
from qsea.qstate import (
    ARITH_TOL,
    CNOT,
    CRY,
    CSWAP,
    CZ,
    H,
    RY,
    RZ,
    STATE_TOL,
    SWAP,
    X,
    DensityMatrix,
    Gate,
    Op,
    StateVector,
    apply_gate,
    apply_gate_density,
    apply_matrix,
    basis_state,
    inverse_ops,
    make_state,
    measure_probs,
    partial_trace,
    run_circuit,
    tensor,
    to_density,
)

S = 1 / np.sqrt(2)
BELL = make_state(2, [1, 0, 0, 1])


# -- construction ---------------------------------------------------------------


@pytest.mark.parametrize("n, amps, expected", [
    (1, [1, 0], [1, 0]),
    (1, [3, 4], [0.6, 0.8]),
    (2, [1, 1, 1, 1], [0.5, 0.5, 0.5, 0.5]),
])
def test_make_state_normalises(n, amps, expected):
    np.testing.assert_allclose(make_state(n, amps).amps, expected, atol=ARITH_TOL)


def test_make_state_errors():
    with pytest.raises(DimensionError):
        make_state(2, [1, 0])
    with pytest.raises(DegenerateInputError):
        make_state(1, [0, 0])


def test_state_is_immutable():
    s = make_state(1, [1, 0])
    with pytest.raises(ValueError):
        s.amps[0] = 0


def test_gate_rejects_non_unitary():
    with pytest.raises(DimensionError):
        Gate("bad", [[1, 1], [0, 1]])
    with pytest.raises(DimensionError):
        Gate("odd", np.eye(3))


# -- gate application ------------------------------------------------------------


def test_hadamard_on_zero():
    np.testing.assert_allclose(apply_gate(basis_state(1, 0), H, [0]).amps, [S, S], atol=ARITH_TOL)


def test_x_on_most_significant_qubit():
    out = apply_gate(basis_state(2, 0), X, [0])
    np.testing.assert_allclose(out.amps, [0, 0, 1, 0], atol=ARITH_TOL)


def test_cz_phases():
    np.testing.assert_allclose(apply_gate(basis_state(2, 3), CZ, [0, 1]).amps, [0, 0, 0, -1])
    np.testing.assert_allclose(apply_gate(basis_state(2, 0), CZ, [0, 1]).amps, [1, 0, 0, 0])


def test_control_is_first_target():
    # CNOT with control on qubit 1 and target qubit 0: |01> -> |11>
    out = apply_gate(basis_state(2, 0b01), CNOT, [1, 0])
    np.testing.assert_allclose(out.amps, [0, 0, 0, 1])


@pytest.mark.parametrize("targets", [[2], [0, 0], [-1]])
def test_apply_gate_bad_targets(targets):
    gate = H if len(targets) == 1 else CZ
    with pytest.raises(QubitIndexError):
        apply_gate(basis_state(2, 0), gate, targets)


def test_apply_gate_arity_mismatch():
    with pytest.raises(QubitIndexError):
        apply_gate(basis_state(2, 0), H, [0, 1])


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_apply_matches_full_matrix_oracle(n, rng):
    for k in range(1, min(n, 3) + 1):
        for _ in range(5):
            targets = list(rng.permutation(n)[:k])
            u = random_unitary(2**k, rng)
            psi = random_amps(2**n, rng)
            got = apply_matrix(psi, u, targets, n)
            np.testing.assert_allclose(got, embed(u, targets, n) @ psi, atol=1e-12)


def test_apply_batched_rows(rng):
    n = 4
    psi = np.stack([random_amps(16, rng) for _ in range(3)])
    u = random_unitary(4, rng)
    got = apply_matrix(psi, u, [3, 1], n)
    np.testing.assert_allclose(got, psi @ embed(u, [3, 1], n).T, atol=1e-12)


def test_density_gate_matches_conjugation(rng):
    n = 3
    a = random_amps(8, rng)
    rho = to_density(StateVector(n, a))
    u = random_unitary(4, rng)
    got = apply_gate_density(rho, Gate("U", u), [2, 0]).rho
    full = embed(u, [2, 0], n)
    np.testing.assert_allclose(got, full @ rho.rho @ full.conj().T, atol=1e-12)


def test_inverse_ops_undo_circuit(rng):
    n = 3
    ops = [Op(H, (0,)), Op(RY(0.3), (1,)), Op(CRY(1.1), (0, 2)), Op(CZ, (1, 2)), Op(RZ(0.7), (2,)), Op(CSWAP, (2, 0, 1))]
    psi = StateVector(n, random_amps(8, rng))
    back = run_circuit(run_circuit(psi, ops), inverse_ops(ops))
    np.testing.assert_allclose(back.amps, psi.amps, atol=1e-12)


def test_swap_and_cswap():
    np.testing.assert_allclose(apply_gate(basis_state(2, 0b01), SWAP, [0, 1]).amps, [0, 0, 1, 0])
    out = apply_gate(basis_state(3, 0b101), CSWAP, [0, 1, 2])
    assert abs(out.amps[0b110]) == pytest.approx(1.0)
    out = apply_gate(basis_state(3, 0b001), CSWAP, [0, 1, 2])
    assert abs(out.amps[0b001]) == pytest.approx(1.0)


# -- tensor and density -------------------------------------------------------------


def test_tensor_examples():
    zero, plus = basis_state(1, 0), make_state(1, [1, 1])
    np.testing.assert_allclose(tensor(zero, zero).amps, [1, 0, 0, 0])
    np.testing.assert_allclose(tensor(make_state(1, [0.6, 0.8]), zero).amps, [0.6, 0, 0.8, 0], atol=ARITH_TOL)
    np.testing.assert_allclose(tensor(plus, plus).amps, [0.5] * 4, atol=ARITH_TOL)
    assert tensor(plus, tensor(plus, zero)).n_qubits == 3


@pytest.mark.parametrize("amps, expected", [
    ([1, 0], [[1, 0], [0, 0]]),
    ([1, 1], [[0.5, 0.5], [0.5, 0.5]]),
    ([0.6, 0.8], [[0.36, 0.48], [0.48, 0.64]]),
])
def test_to_density_examples(amps, expected):
    rho = to_density(make_state(1, amps))
    np.testing.assert_allclose(rho.rho, expected, atol=ARITH_TOL)
    assert rho.is_valid()
    assert np.linalg.matrix_rank(rho.rho, tol=1e-9) == 1


# -- partial trace ---------------------------------------------------------------


def test_partial_trace_product():
    rho = to_density(basis_state(2, 0))
    np.testing.assert_allclose(partial_trace(rho, [0]).rho, [[1, 0], [0, 0]])


@pytest.mark.parametrize("keep", [[0], [1]])
def test_partial_trace_bell(keep):
    np.testing.assert_allclose(partial_trace(to_density(BELL), keep).rho, np.eye(2) / 2, atol=ARITH_TOL)


def test_partial_trace_recovers_factor(rng):
    for _ in range(50):
        a, b = StateVector(1, random_amps(2, rng)), StateVector(1, random_amps(2, rng))
        red = partial_trace(to_density(tensor(a, b)), [0])
        np.testing.assert_allclose(red.rho, to_density(a).rho, atol=STATE_TOL)


@pytest.mark.parametrize("keep", [[0], [2], [1, 3], [3, 1], [0, 2, 3], [2, 0, 3, 1]])
def test_partial_trace_matches_loops(keep, rng):
    n = 4
    psi = random_amps(16, rng)
    rho = np.outer(psi, psi.conj())
    got = partial_trace(DensityMatrix(n, rho), keep).rho
    np.testing.assert_allclose(got, partial_trace_loops(rho, keep, n), atol=1e-12)


def test_partial_trace_keep_all_is_identity(rng):
    psi = StateVector(3, random_amps(8, rng))
    rho = to_density(psi)
    np.testing.assert_allclose(partial_trace(rho, [0, 1, 2]).rho, rho.rho, atol=ARITH_TOL)


@pytest.mark.parametrize("keep", [[], [0, 0], [5]])
def test_partial_trace_bad_keep(keep):
    with pytest.raises(QubitIndexError):
        partial_trace(to_density(BELL), keep)


# -- measurement ----------------------------------------------------------------


def test_measure_examples():
    np.testing.assert_allclose(measure_probs(make_state(1, [1, 1]), [0]), [0.5, 0.5], atol=ARITH_TOL)
    np.testing.assert_allclose(measure_probs(make_state(1, [0.6, 0.8]), [0]), [0.36, 0.64], atol=ARITH_TOL)
    np.testing.assert_allclose(measure_probs(BELL, [0]), [0.5, 0.5], atol=ARITH_TOL)


def test_measure_register_order():
    s = basis_state(3, 0b110)
    assert measure_probs(s, [0, 2])[0b10] == pytest.approx(1.0)
    assert measure_probs(s, [2, 0])[0b01] == pytest.approx(1.0)


def test_measure_bad_register():
    with pytest.raises(QubitIndexError):
        measure_probs(BELL, [2])


# -- properties -----------------------------------------------------------------


@st.composite
def circuits(draw):
    n = draw(st.integers(1, 5))
    seed = draw(st.integers(0, 2**32 - 1))
    depth = draw(st.integers(0, 12))
    return n, seed, depth


def _random_ops(n, depth, rng):
    ops = []
    for _ in range(depth):
        k = int(rng.integers(1, min(n, 3) + 1))
        ops.append(Op(Gate("U", random_unitary(2**k, rng)), tuple(rng.permutation(n)[:k])))
    return ops


@given(circuits())
def test_norm_preserved(case):
    n, seed, depth = case
    rng = np.random.default_rng(seed)
    psi = run_circuit(StateVector(n, random_amps(2**n, rng)), _random_ops(n, depth, rng))
    assert abs(np.linalg.norm(psi.amps) - 1) < STATE_TOL


@given(circuits())
def test_measure_all_is_born_rule(case):
    n, seed, _ = case
    psi = StateVector(n, random_amps(2**n, np.random.default_rng(seed)))
    np.testing.assert_allclose(measure_probs(psi, range(n)), np.abs(psi.amps) ** 2, atol=ARITH_TOL)


@given(st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_partial_trace_composes(n, seed):
    rng = np.random.default_rng(seed)
    psi = StateVector(n, random_amps(2**n, rng))
    rho = to_density(psi)
    a = sorted(rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False))
    b_pos = sorted(rng.choice(len(a), size=int(rng.integers(1, len(a) + 1)), replace=False))
    two_step = partial_trace(partial_trace(rho, a), b_pos)
    direct = partial_trace(rho, [a[i] for i in b_pos])
    np.testing.assert_allclose(two_step.rho, direct.rho, atol=STATE_TOL)
    assert abs(direct.trace() - 1) < STATE_TOL


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_marginal_matches_reduced_diagonal(n, seed):
    rng = np.random.default_rng(seed)
    psi = StateVector(n, random_amps(2**n, rng))
    reg = list(rng.permutation(n)[: int(rng.integers(1, n + 1))])
    probs = measure_probs(psi, reg)
    assert abs(probs.sum() - 1) < STATE_TOL
    np.testing.assert_allclose(probs, np.real(np.diag(partial_trace(to_density(psi), reg).rho)), atol=STATE_TOL)


def test_named_gates_are_unitary():
    for g in (H, X, CNOT, CZ, SWAP, CSWAP, RY(0.3), RZ(1.2), CRY(2.0)):
        m = g.matrix
        assert np.max(np.abs(m.conj().T @ m - np.eye(len(m)))) < STATE_TOL
