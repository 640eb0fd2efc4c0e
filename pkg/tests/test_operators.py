import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from tcq.operators import (
    FockTruncation,
    Operator,
    annihilation,
    buffer_mask,
    collective,
    coupling_operator,
    creation,
    excitation_operator,
    ground_indices,
    masked,
    number,
    oracle_expm,
    pauli_embed,
    tensor,
)

TR = FockTruncation(12, 3)


def test_truncation_validation():
    assert FockTruncation().dim == 41
    for bad in [dict(n_max=0), dict(n_max=2.5), dict(buffer=-1), dict(n_max=5, buffer=5)]:
        with pytest.raises(ValueError):
            FockTruncation(**bad)


def test_operator_rejects_wrong_shapes():
    with pytest.raises(ValueError):
        Operator(np.zeros((3, 4)))
    with pytest.raises(ValueError):
        Operator(np.eye(4), 1)
    with pytest.raises(ValueError):
        Operator(np.eye(2), 1) @ Operator(np.eye(4), 2)


def test_operator_is_immutable():
    op = Operator(np.eye(2), 1)
    with pytest.raises(ValueError):
        op.data[0, 0] = 2


def test_ladder_commutator_below_cutoff():
    a, ad = annihilation(TR).data, creation(TR).data
    comm = a @ ad - ad @ a
    np.testing.assert_allclose(np.diag(comm)[:-1], 1.0)
    np.testing.assert_allclose(ad @ a, number(TR).data, atol=1e-14)


def test_collective_operators():
    S3 = collective("3", 3).data
    np.testing.assert_allclose(np.diag(S3)[[0, 7]], [1.5, -1.5])
    Sp = collective("+", 2).data
    np.testing.assert_allclose(Sp, pauli_embed("+", 1, 2).data + pauli_embed("+", 2, 2).data)
    with pytest.raises(ValueError):
        collective("1", 2)
    with pytest.raises(ValueError):
        pauli_embed("+", 3, 2)


def test_pauli_ordering_atom_one_outermost():
    sp1 = pauli_embed("+", 1, 2).data
    # |-,+> (index 2) is raised to |+,+> (index 0)
    assert sp1[0, 2] == 1 and np.count_nonzero(sp1) == 2


@pytest.mark.parametrize("n", [1, 2, 3])
def test_coupling_is_hermitian_and_conserves_excitations(n):
    A = coupling_operator(n, TR)
    K = excitation_operator(n, TR)
    assert A.is_hermitian()
    assert np.abs((A @ K - K @ A).data).max() == 0


def test_tensor_argument_checks():
    with pytest.raises(ValueError):
        tensor(number(TR), number(TR))


def test_masks_and_ground_indices():
    m = buffer_mask(2, TR)
    assert m.sum() == 4 * (TR.dim - TR.buffer)
    assert masked(coupling_operator(2, TR), 2, TR).shape == (m.sum(), m.sum())
    np.testing.assert_array_equal(ground_indices(2, TR), [0, 13, 26, 39])


def test_oracle_expm_basics():
    np.testing.assert_array_equal(oracle_expm(np.zeros((3, 3))), np.eye(3))
    with pytest.raises(ValueError):
        oracle_expm(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        oracle_expm(np.zeros((2, 3)))
    op = oracle_expm(coupling_operator(1, TR), -0.3j)
    assert isinstance(op, Operator)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 12), st.floats(0.01, 30), st.integers(0, 2**31 - 1))
def test_oracle_expm_matches_library(dim, scale, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    X = (X + X.conj().T) / 2
    got = oracle_expm(X, -1j * scale)
    ref = scipy.linalg.expm(-1j * scale * X)
    assert np.abs(got - ref).max() < 1e-11 * max(1.0, scale * np.abs(X).max())
