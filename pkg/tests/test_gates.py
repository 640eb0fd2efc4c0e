import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tcq import gates as G
from tcq.operators import oracle_expm


def test_rwa_propagator_at_zero_and_quarter_turn():
    np.testing.assert_array_equal(G.rwa_propagator_two(0.0, 0.3, 0.7).matrix, np.eye(4))
    U = G.u_t0_quarter()
    np.testing.assert_array_equal(U[1:3, 1:3], [[0, -1], [1, 0]])


@pytest.mark.parametrize("gate", list(G.PAIRS))
def test_rwa_propagator_is_exponential_of_secular_generator(gate):
    i, j = G.PAIRS[gate]
    dim = 4 if gate == "CZ2" else 8
    rate, phi, t = 0.013, 0.8, 97.0
    X = np.zeros((dim, dim), dtype=complex)
    X[i, j] = np.exp(1j * phi)
    X[j, i] = np.exp(-1j * phi)
    ref = oracle_expm(X, 1j * rate * t)
    assert np.abs(G.rwa_propagator(gate, t, rate, phi).matrix - ref).max() < 1e-14


def test_basis_change_is_orthogonal():
    for n in (2, 3):
        T = G.basis_change(n).matrix
        np.testing.assert_allclose(T @ T.T, np.eye(2 ** n), atol=1e-15)
    with pytest.raises(ValueError):
        G.basis_change(4)


def test_cnot_two_products():
    out = G.assemble_cnot_two()
    np.testing.assert_array_equal(out["PU"], np.diag([1, 1, -1, 1]))
    np.testing.assert_array_equal(out["C_sigma_z"], np.diag([1, 1, 1, -1]))
    np.testing.assert_array_equal(out["C_NOT"], G.CNOT)
    np.testing.assert_array_equal(G.CNOT @ G.CNOT, np.eye(4))


def test_sigma3_branch():
    np.testing.assert_array_equal(G.sigma3_sigma3(), np.kron(G.SIGMA3, G.SIGMA3))


def test_three_qubit_variants():
    for v in ("A", "B", "C"):
        tilde = G.assemble_three(v)["tilde"]
        assert np.array_equal(np.abs(tilde), np.eye(8)) and np.all(np.diag(tilde).imag == 0)
    np.testing.assert_array_equal(G.u_half("A"), np.diag([1, 1, 1, 1, -1, -1, 1, 1]))
    np.testing.assert_array_equal(G.assemble_three("A")["gate"], G.CNOT_12)
    np.testing.assert_array_equal(G.assemble_three("B")["gate"], G.CNOT_23)
    np.testing.assert_array_equal(G.assemble_three("C")["gate"], G.CNOT_13)
    with pytest.raises(ValueError):
        G.assemble_three("D")


def test_four_step_cnot():
    np.testing.assert_array_equal(G.cnot13_four_step(), G.CNOT_13)


def _truth_table(M, n):
    for bits in itertools.product((0, 1), repeat=n):
        k = int("".join(map(str, bits)), 2)
        flip = all(bits[:-1])
        out = list(bits)
        if flip:
            out[-1] ^= 1
        j = int("".join(map(str, out)), 2)
        col = M[:, k]
        assert abs(col[j] - 1) < 1e-14 and np.abs(np.delete(col, j)).max() < 1e-14


def test_ccnot():
    M = G.assemble_ccnot().matrix
    np.testing.assert_array_equal(M, G.ccnot_direct())
    np.testing.assert_array_equal(G.V_HALF @ G.V_HALF, G.SIGMA1)
    _truth_table(M, 3)


def test_cccnot_gray_code_order():
    M = G.cccnot_identity_check().matrix
    _truth_table(M, 4)
    assert np.abs(M @ M - np.eye(16)).max() < 1e-14


def test_quoted_fourth_root_is_not_unitary():
    V = G.V_QUARTER_QUOTED
    assert np.sort(np.abs(np.linalg.eigvals(V))) == pytest.approx([np.sqrt(0.5), 1.0])
    assert np.abs(np.linalg.matrix_power(G.V_QUARTER, 4) - G.SIGMA1).max() < 1e-15
    assert G.QubitGate(G.V_QUARTER).unitarity_defect() < 1e-15


def test_drawn_wiring_fails_even_with_unitary_root():
    M = G.cccnot_identity_check(G.CCCNOT_SEQUENCE_DRAWN, G.V_QUARTER).matrix
    assert np.abs(M - G.cccnot_direct()).max() > 0.1


def test_controlled_checks():
    with pytest.raises(ValueError):
        G.controlled(G.SIGMA1, 2, 2, 3)


def test_appendix_single_qubit_limits():
    theta, t = 0.8, 3.1
    np.testing.assert_allclose(G.appendix_single_qubit(theta, 0.0, t).matrix,
                               np.diag([np.exp(-0.5j * t * theta), np.exp(0.5j * t * theta)]), atol=1e-15)
    h = 0.4
    np.testing.assert_allclose(G.appendix_single_qubit(0.0, h, t).matrix,
                               np.cos(h * t) * np.eye(2) - 1j * np.sin(h * t) * G.SIGMA1, atol=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(-20, 20), st.floats(0, 20), st.floats(0, 200))
def test_appendix_single_qubit_unitary(theta, h, t):
    assert G.appendix_single_qubit(theta, h, t).unitarity_defect() < 1e-14


@pytest.mark.parametrize("delta,h", [(1.0, 0.01), (2.5, 0.3), (0.7, 0.05)])
def test_walsh_hadamard_sequence(delta, h):
    seq = G.appendix_walsh_hadamard_sequence(delta, h)
    np.testing.assert_array_equal(seq["V0"], np.diag([1, 1j]))
    assert np.abs(seq["product"] - G.W).max() <= 2.3e-16
    Wm = G.appendix_walsh_hadamard(delta, h).matrix
    assert np.abs(Wm @ Wm - np.eye(2)).max() < 1e-15
    with pytest.raises(ValueError):
        G.appendix_walsh_hadamard(-1.0, h)


def test_cis_snaps_quarter_turns():
    assert G.cis(np.pi / 2) == 1j
    assert G.cis(-3 * np.pi) == -1
    assert G.cis(0.3) == pytest.approx(np.exp(0.3j))


def test_fidelity_is_phase_invariant():
    U = G.CNOT * np.exp(0.7j)
    assert G.fidelity(G.CNOT, U) == pytest.approx(1.0)
