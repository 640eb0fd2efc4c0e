import warnings

import numpy as np
import pytest
import scipy.linalg

from tcq.operators import FockTruncation, coupling_operator, masked
from tcq.spin import (
    SpinBlockFunctions,
    b_half,
    b_three_half,
    block_mask,
    cosw,
    decomposition,
    expm_full,
    expm_spin_half,
    expm_spin_one,
    expm_spin_three_half,
    keylemma_powers,
    rsinw,
    sinw,
)

TR = FockTruncation(16, 4)


def test_continuation_to_negative_lambda():
    x = 0.7
    assert cosw(-4.0, x) == pytest.approx(np.cosh(2 * x))
    assert sinw(-4.0, x) == pytest.approx(np.sinh(2 * x) / 2)
    assert rsinw(-4.0, x) == pytest.approx(-2 * np.sinh(2 * x))
    assert sinw(0.0, x) == x
    assert cosw(0.0, x) == 1.0


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("tg", [0.4, 3.7])
def test_expm_full_matches_library(n, tg):
    got = expm_full(n, tg, 1.0, TR).data
    ref = scipy.linalg.expm(-1j * tg * coupling_operator(n, TR).data)
    assert np.abs(masked(got - ref, n, TR)).max() < 1e-12


def test_expm_full_scales_with_g():
    a = expm_full(3, 2.0, 0.5, TR).data
    b = expm_full(3, 1.0, 1.0, TR).data
    np.testing.assert_allclose(a, b, atol=1e-14)


@pytest.mark.parametrize("fn,levels", [(expm_spin_half, 2), (expm_spin_one, 3), (expm_spin_three_half, 4)])
def test_long_times_stay_finite_and_unitary(fn, levels):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        U = fn(300.0, 1.0, TR)
    assert np.all(np.isfinite(U))
    m = block_mask(levels, FockTruncation(16, 8))
    # columns well inside the cutoff stay normalized
    cols = U[:, m]
    assert np.abs(np.linalg.norm(cols[:, :2], axis=0) - 1).max() < 1e-12


def test_spin_half_block_generator():
    B = b_half(TR)
    assert np.allclose(B, B.conj().T)


def test_keylemma_range():
    with pytest.raises(ValueError):
        keylemma_powers(9, TR)
    even, odd = keylemma_powers(0, TR)
    m = block_mask(4, TR)
    np.testing.assert_allclose(even[np.ix_(m, m)], np.eye(m.sum()), atol=1e-15)
    np.testing.assert_allclose(odd[np.ix_(m, m)], b_three_half(TR)[np.ix_(m, m)], atol=1e-15)


def test_decomposition_blocks():
    dec = decomposition(3)
    assert [b[2] for b in dec.blocks] == [2, 2, 4]
    with pytest.raises(ValueError):
        decomposition(4)


def test_block_functions_at_zero_time():
    fn = SpinBlockFunctions(0.0)
    N = np.arange(5.0)
    np.testing.assert_allclose(fn.f2(N), 1.0)
    np.testing.assert_allclose(fn.f(N), 0.0)
    np.testing.assert_allclose(fn.h1(N), 0.0)
