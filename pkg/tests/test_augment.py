import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracle import embed, partial_trace_loops, random_amps
from qsea.augment import (
    THETA_MAX,
    EaParams,
    augment_batch,
    augment_state,
    build_ea_circuit,
    n_params,
    positive_fidelity_batch,
    positive_reduced,
    project_theta,
    ring_pairs,
)
from qsea.errors import DimensionError, ParameterError
from qsea.fidelity import pure_mixed_fidelity
from qsea.qstate import H, StateVector, basis_state, make_state, ry_matrix, rz_matrix, tensor

S = 1 / np.sqrt(2)
CZ4 = np.diag([1, 1, 1, -1]).astype(complex)


def cry4(t):
    m = np.eye(4, dtype=complex)
    m[2:, 2:] = ry_matrix(t)
    return m


def oracle_unitary(n, layers, theta):
    """The documented layout written out with full matrices."""
    q = n + 1
    u = embed(H.matrix, [n], q)
    k = 0
    for _ in range(layers):
        for j in range(q):
            u = embed(ry_matrix(theta[k]), [j], q) @ u
            u = embed(rz_matrix(theta[k + 1]), [j], q) @ u
            k += 2
        for j in range(n):
            u = embed(cry4(theta[k]), [n, j], q) @ u
            k += 1
        pairs = [] if n == 1 else [(0, 1)] if n == 2 else [(j, (j + 1) % n) for j in range(n)]
        for a, b in pairs:
            u = embed(CZ4, [a, b], q) @ u
    return u


def cry_example():
    theta = np.zeros(n_params(1, 1))
    theta[4] = np.pi / 2
    return EaParams(1, 1, theta)


@pytest.mark.parametrize("n, count", [(1, 6), (2, 10)])
def test_gate_counts(n, count):
    assert len(build_ea_circuit(EaParams.zeros(n, 1)).ops) == count


def test_param_count_per_layer():
    assert n_params(1, 1) == 5
    assert n_params(8, 2) == 2 * 26


@pytest.mark.parametrize("n, pairs", [(1, []), (2, [(0, 1)]), (3, [(0, 1), (1, 2), (2, 0)])])
def test_ring(n, pairs):
    assert ring_pairs(n) == pairs


def test_circuit_structure():
    circ = build_ea_circuit(EaParams.zeros(3, 2))
    assert circ.ops[0].gate.name == "H" and circ.ops[0].targets == (3,)
    assert circ.ancilla == 3 and circ.n_qubits == 4
    params = [op.param for op in circ.ops if op.param is not None]
    assert params == list(range(n_params(3, 2)))
    assert list(circ.param_gates[:10]) == ["RY", "RZ"] * 4 + ["CRY", "CRY"]


def test_params_validation():
    with pytest.raises(ParameterError):
        EaParams(2, 1, np.zeros(5))
    with pytest.raises(ParameterError):
        EaParams(1, 1, [0, 0, 0, 0, 2.0])
    with pytest.raises(ParameterError):
        EaParams(1, 1, [0, 0, 0, -0.1, 0])


def test_zero_theta_is_hadamard_on_ancilla():
    psi = augment_state(basis_state(2, 0), EaParams.zeros(2, 2))
    expected = tensor(basis_state(2, 0), make_state(1, [1, 1]))
    np.testing.assert_allclose(psi.amps, expected.amps, atol=1e-12)


def test_cry_example_state():
    psi = augment_state(basis_state(1, 0), cry_example())
    c = np.cos(np.pi / 4)
    # (|0>|0> + (c|0> + c|1>)|1>) / sqrt2, data qubit first
    np.testing.assert_allclose(psi.amps, np.array([1, c, 0, c]) * S, atol=1e-12)


def test_cry_example_reduced():
    psi = augment_state(basis_state(1, 0), cry_example())
    rho = positive_reduced(psi, 1)
    oracle = partial_trace_loops(np.outer(psi.amps, psi.amps.conj()), [0], 2)
    np.testing.assert_allclose(rho.rho, oracle, atol=1e-12)
    assert rho.rho[0, 0].real == pytest.approx(0.75, abs=1e-12)
    assert pure_mixed_fidelity(basis_state(1, 0), rho) == pytest.approx(0.75, abs=1e-12)


def test_reduced_examples():
    rho = positive_reduced(tensor(basis_state(2, 0), make_state(1, [1, 1])), 2)
    np.testing.assert_allclose(rho.rho, np.diag([1, 0, 0, 0]), atol=1e-12)
    bell = positive_reduced(make_state(2, [1, 0, 0, 1]), 1)
    np.testing.assert_allclose(bell.rho, np.eye(2) / 2, atol=1e-12)


def test_dimension_errors():
    with pytest.raises(DimensionError):
        augment_state(basis_state(2, 0), EaParams.zeros(3, 1))
    with pytest.raises(DimensionError):
        positive_reduced(basis_state(2, 0), 2)


@pytest.mark.parametrize("n, layers", [(1, 1), (2, 1), (3, 2), (4, 1)])
def test_matches_full_matrix_oracle(n, layers, rng):
    p = EaParams.random(n, layers, rng)
    a = random_amps(2**n, rng)
    psi = augment_state(StateVector(n, a), p)
    x = np.kron(a, [1, 0])
    np.testing.assert_allclose(psi.amps, oracle_unitary(n, layers, p.theta) @ x, atol=1e-12)


def test_batch_fidelity_matches_reduced(rng):
    p = EaParams.random(3, 2, rng)
    anchors = np.stack([random_amps(8, rng) for _ in range(4)])
    fp = positive_fidelity_batch(anchors, p)
    for a, f in zip(anchors, fp):
        rho = positive_reduced(augment_state(StateVector(3, a), p), 3)
        assert f == pytest.approx(pure_mixed_fidelity(StateVector(3, a), rho), abs=1e-12)


def test_projection():
    np.testing.assert_array_equal(project_theta(np.array([-1.0, 0.5, 3.0])), [0.0, 0.5, THETA_MAX])


@given(st.integers(1, 5), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_output_unit_norm_and_deterministic(n, layers, seed):
    rng = np.random.default_rng(seed)
    p = EaParams.random(n, layers, rng)
    a = StateVector(n, random_amps(2**n, rng))
    psi = augment_state(a, p)
    assert abs(np.linalg.norm(psi.amps) - 1) < 1e-10
    assert psi.amps.tobytes() == augment_state(a, p).amps.tobytes()
    assert positive_reduced(psi, n).is_valid()


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_identity_anchor(n, layers_seed):
    layers = 1 + layers_seed % 3
    rho = positive_reduced(augment_state(basis_state(n, 0), EaParams.zeros(n, layers)), n)
    np.testing.assert_allclose(rho.rho, np.outer(np.eye(2**n)[0], np.eye(2**n)[0]), atol=1e-10)


@given(st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_fidelity_lipschitz_in_theta(n, seed):
    # each angle enters one gate, so |dF/dtheta_k| <= 2 ||G_k|| <= 1; allow slack
    rng = np.random.default_rng(seed)
    p = EaParams.random(n, 2, rng)
    a = random_amps(2**n, rng)[None]
    f0 = positive_fidelity_batch(a, p)[0]
    for delta in (1e-2, 1e-4, 1e-6):
        for k in rng.choice(p.theta.size, size=min(5, p.theta.size), replace=False):
            th = p.theta.copy()
            th[k] = np.clip(th[k] + delta, 0, THETA_MAX)
            moved = abs(th[k] - p.theta[k])
            f1 = positive_fidelity_batch(a, p.with_theta(th))[0]
            assert abs(f1 - f0) <= 2.0 * moved + 1e-12


def test_batch_rows_independent(rng):
    p = EaParams.random(3, 2, rng)
    anchors = np.stack([random_amps(8, rng) for _ in range(5)])
    batch = augment_batch(anchors, p)
    for a, row in zip(anchors, batch):
        np.testing.assert_allclose(row, augment_state(StateVector(3, a), p).amps, atol=1e-13)
