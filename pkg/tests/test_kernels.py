import numpy as np
import pytest

from tcq import kernels
from tcq.operators import FockTruncation
from tcq.simulator import sector_basis


def test_backend_selection(monkeypatch):
    monkeypatch.setenv("TCQ_BACKEND", "numpy")
    assert kernels.backend_name() == "numpy"
    monkeypatch.setenv("TCQ_BACKEND", "fortran")
    with pytest.raises(ValueError):
        kernels.backend_name()
    monkeypatch.delenv("TCQ_BACKEND")
    assert kernels.backend_name() == ("numba" if kernels.HAVE_NUMBA else "numpy")


def _problem(n, seed=1):
    sb = sector_basis(n, FockTruncation(9, 3))
    rng = np.random.default_rng(seed)
    Z = np.linalg.qr(rng.normal(size=(sb.dim, 2 ** n)) + 1j * rng.normal(size=(sb.dim, 2 ** n)))[0]
    amps = (rng.uniform(0.05, 0.2, n) * np.exp(1j * rng.uniform(0, 6, n))).astype(complex)
    freqs = rng.uniform(1, 5, n)
    return sb, np.ascontiguousarray(Z), amps, freqs


@pytest.mark.parametrize("n", [2, 3])
def test_backends_agree(n):
    sb, Z, amps, freqs = _problem(n)
    args = (sb.lam, sb.offs, sb.sizes, sb.blocks, amps, freqs, 0.3, 0.01, 700)
    a = kernels.rk4_propagate(Z.copy(), *args, backend="numpy")
    b = kernels.rk4_propagate(Z.copy(), *args, backend="numba")
    assert np.abs(a - b).max() < 1e-13


def test_zero_drive_leaves_state_unchanged():
    sb, Z, amps, freqs = _problem(3)
    for backend in ("numpy", "numba"):
        out = kernels.rk4_propagate(Z.copy(), sb.lam, sb.offs, sb.sizes, sb.blocks, 0 * amps, freqs, 0.0, 0.01, 50, backend)
        np.testing.assert_array_equal(out, Z)


def test_unknown_backend():
    sb, Z, amps, freqs = _problem(2)
    with pytest.raises(ValueError):
        kernels.rk4_propagate(Z, sb.lam, sb.offs, sb.sizes, sb.blocks, amps, freqs, 0.0, 0.01, 1, "cuda")
