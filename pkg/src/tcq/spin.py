"""Change of basis to collective-spin blocks and closed-form block exponentials.

The coupling operator A_n commutes with the total excitation number, and a
constant orthogonal matrix T acting on the atoms splits it into irreducible
spin blocks: 1/2 (x) 1/2 = 0 + 1 and 1/2 (x) 1/2 (x) 1/2 = 1/2 + 1/2 + 3/2.
Each block exponential exp(-i x B) with x = t g is written with scalar
functions of the photon number operator N, evaluated entrywise on its
diagonal.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import (
    FockTruncation,
    Operator,
    annihilation,
)

_S2, _S3, _S6 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(6.0)

T_TWO = np.array(
    [
        [0.0, 1.0, 0.0, 0.0],
        [1 / _S2, 0.0, 1 / _S2, 0.0],
        [-1 / _S2, 0.0, 1 / _S2, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]
)

T_THREE = np.array(
    [
        [0, 0, 0, 0, 1, 0, 0, 0],
        [1 / _S2, 0, 1 / _S6, 0, 0, 1 / _S3, 0, 0],
        [-1 / _S2, 0, 1 / _S6, 0, 0, 1 / _S3, 0, 0],
        [0, 0, 0, _S2 / _S3, 0, 0, 1 / _S3, 0],
        [0, 0, -_S2 / _S3, 0, 0, 1 / _S3, 0, 0],
        [0, 1 / _S2, 0, -1 / _S6, 0, 0, 1 / _S3, 0],
        [0, -1 / _S2, 0, -1 / _S6, 0, 0, 1 / _S3, 0],
        [0, 0, 0, 0, 0, 0, 0, 1],
    ],
    dtype=float,
)


@dataclass(frozen=True)
class BlockDecomposition:
    """T (atom factor only) and the (spin label, offset, size) of each block."""

    n_atoms: int
    T: np.ndarray
    blocks: tuple

    def full_T(self, tr: FockTruncation) -> np.ndarray:
        return np.kron(self.T, np.eye(tr.dim))


def decomposition(n: int) -> BlockDecomposition:
    if n == 2:
        return BlockDecomposition(2, T_TWO.copy(), (("scalar", 0, 1), ("1", 1, 3)))
    if n == 3:
        return BlockDecomposition(3, T_THREE.copy(), (("1/2", 0, 2), ("1/2", 2, 2), ("3/2", 4, 4)))
    raise ValueError(f"block decomposition defined for n in (2, 3), got {n}")


# -- entire functions of lambda, continued to lambda < 0 ---------------------

_LIMIT = 1e-14


def cosw(lam, x):
    """cos(x sqrt(lam)); cosh(x sqrt(-lam)) for lam < 0."""
    lam = np.asarray(lam, dtype=float)
    r = np.sqrt(np.abs(lam))
    with np.errstate(over="ignore"):
        return np.where(lam >= 0, np.cos(x * r), np.cosh(x * r))


def sinw(lam, x):
    """sin(x sqrt(lam)) / sqrt(lam), with limit x at lam = 0."""
    lam = np.asarray(lam, dtype=float)
    r = np.sqrt(np.abs(lam))
    small = r < _LIMIT
    safe = np.where(small, 1.0, r)
    with np.errstate(over="ignore", invalid="ignore"):
        val = np.where(lam >= 0, np.sin(x * r), np.sinh(x * r)) / safe
    return np.where(small, x * np.ones_like(lam), val)


def rsinw(lam, x):
    """sqrt(lam) sin(x sqrt(lam)); -sqrt(-lam) sinh(x sqrt(-lam)) for lam < 0."""
    lam = np.asarray(lam, dtype=float)
    r = np.sqrt(np.abs(lam))
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(lam >= 0, r * np.sin(x * r), -r * np.sinh(x * r))


def _mul(c, f):
    # c * f with exact zeros where c == 0, so that unused hyperbolic branches
    # at negative photon arguments cannot turn into inf * 0
    c = np.asarray(c, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        return np.where(c == 0.0, 0.0, c * f)


def d_of(N):
    N = np.asarray(N, dtype=float)
    return 16 * N**2 + 9


def lambdas(N):
    N = np.asarray(N, dtype=float)
    sd = np.sqrt(d_of(N))
    return 5 * N + sd, 5 * N - sd


def v_coeffs(N):
    N = np.asarray(N, dtype=float)
    sd = np.sqrt(d_of(N))
    return -2 * N - 3 + sd, -2 * N - 3 - sd


def w_coeffs(N):
    N = np.asarray(N, dtype=float)
    sd = np.sqrt(d_of(N))
    return 2 * N - 3 + sd, 2 * N - 3 - sd


@dataclass(frozen=True)
class SpinBlockFunctions:
    """Scalar functions of the photon number at fixed x = t g."""

    x: float

    # spin 1/2
    def C(self, N):
        return cosw(N, self.x)

    def S(self, N):
        return sinw(N, self.x)

    # spin 1
    def f(self, N):
        lam = 2 * (2 * np.asarray(N, dtype=float) + 1)
        return (-1 + cosw(lam, self.x)) / 2

    def h(self, N):
        lam = 2 * (2 * np.asarray(N, dtype=float) + 1)
        return _S2 * sinw(lam, self.x)

    # spin 3/2
    def _parts(self, N):
        lp, lm = lambdas(N)
        return lp, lm, 2 * np.sqrt(d_of(N))

    def f2(self, N):
        lp, lm, den = self._parts(N)
        vp, vm = v_coeffs(N)
        return (_mul(vp, cosw(lp, self.x)) - _mul(vm, cosw(lm, self.x))) / den

    def f1(self, N):
        lp, lm, den = self._parts(N)
        wp, wm = w_coeffs(N)
        return (_mul(wp, cosw(lp, self.x)) - _mul(wm, cosw(lm, self.x))) / den

    def f0(self, N):
        lp, lm, den = self._parts(N)
        vp, vm = v_coeffs(N)
        return (_mul(vp, cosw(lm, self.x)) - _mul(vm, cosw(lp, self.x))) / den

    def fm1(self, N):
        lp, lm, den = self._parts(N)
        wp, wm = w_coeffs(N)
        return (_mul(wp, cosw(lm, self.x)) - _mul(wm, cosw(lp, self.x))) / den

    def h1(self, N):
        lp, lm, den = self._parts(N)
        return (cosw(lp, self.x) - cosw(lm, self.x)) / den

    def F1(self, N):
        lp, lm, den = self._parts(N)
        wp, wm = w_coeffs(N)
        return (_mul(wp, sinw(lp, self.x)) - _mul(wm, sinw(lm, self.x))) / den

    def F0(self, N):
        lp, lm, den = self._parts(N)
        vp, vm = v_coeffs(N)
        return (_mul(vp, sinw(lm, self.x)) - _mul(vm, sinw(lp, self.x))) / den

    def H1(self, N):
        lp, lm, den = self._parts(N)
        return (rsinw(lp, self.x) - rsinw(lm, self.x)) / den

    def H0(self, N):
        lp, lm, den = self._parts(N)
        return (sinw(lp, self.x) - sinw(lm, self.x)) / den


# -- block generators ---------------------------------------------------------


def _ladders(tr: FockTruncation):
    a = annihilation(tr).data
    return a, a.conj().T


def b_half(tr: FockTruncation) -> np.ndarray:
    a, ad = _ladders(tr)
    Z = np.zeros_like(a)
    return np.block([[Z, a], [ad, Z]])


def b_one(tr: FockTruncation) -> np.ndarray:
    a, ad = _ladders(tr)
    Z = np.zeros_like(a)
    return _S2 * np.block([[Z, a, Z], [ad, Z, a], [Z, ad, Z]])


def b_three_half(tr: FockTruncation) -> np.ndarray:
    a, ad = _ladders(tr)
    Z = np.zeros_like(a)
    return np.block(
        [
            [Z, _S3 * a, Z, Z],
            [_S3 * ad, Z, 2 * a, Z],
            [Z, 2 * ad, Z, _S3 * a],
            [Z, Z, _S3 * ad, Z],
        ]
    )


def block_mask(levels: int, tr: FockTruncation) -> np.ndarray:
    keep = np.arange(tr.dim) < tr.dim - tr.buffer
    return np.tile(keep, levels)


class _Diag:
    """Builds diag(fn(N + shift)) @ ladder, evaluating fn only where the ladder is nonzero."""

    def __init__(self, tr: FockTruncation):
        self.N = tr.numbers()
        self.a, self.ad = _ladders(tr)

    def __call__(self, fn, shift, raise_by=0, lower_by=0):
        N = self.N
        # rows of (a^dagger)^k vanish for N < k; keep the function argument there physical
        arg = np.maximum(N, raise_by) + shift if raise_by else N + shift
        vals = np.asarray(fn(arg), dtype=float)
        if raise_by:
            vals = np.where(N >= raise_by, vals, 0.0)
        M = np.diag(vals).astype(complex)
        for _ in range(lower_by):
            M = M @ self.a
        for _ in range(raise_by):
            M = M @ self.ad
        return M


def expm_spin_half(t: float, g: float, tr: FockTruncation) -> np.ndarray:
    """exp(-i t g B_1/2) on the 2(n_max+1)-dimensional block."""
    fn = SpinBlockFunctions(t * g)
    D = _Diag(tr)
    return np.block(
        [
            [D(fn.C, 1), -1j * D(fn.S, 1, lower_by=1)],
            [-1j * D(fn.S, 0, raise_by=1), D(fn.C, 0)],
        ]
    )


def expm_spin_one(t: float, g: float, tr: FockTruncation) -> np.ndarray:
    """exp(-i t g B_1) on the 3(n_max+1)-dimensional block."""
    fn = SpinBlockFunctions(t * g)
    D = _Diag(tr)
    one = np.eye(tr.dim)

    def top(M):
        return 1 + (2 * M + 2) / (2 * M + 3) * fn.f(M + 1)

    def bottom(M):
        return 1 + _mul((2 * M) / (2 * M - 1), fn.f(M - 1))

    return np.block(
        [
            [np.diag(top(D.N)) + 0j, -1j * D(fn.h, 1, lower_by=1), D(lambda M: 2 / (2 * M + 3) * fn.f(M + 1), 0, lower_by=2)],
            [-1j * D(fn.h, 0, raise_by=1), one + 2 * D(fn.f, 0), -1j * D(fn.h, 0, lower_by=1)],
            [D(lambda M: 2 / (2 * M - 1) * fn.f(M - 1), 0, raise_by=2), -1j * D(fn.h, -1, raise_by=1), np.diag(bottom(D.N)) + 0j],
        ]
    )


def expm_spin_three_half(t: float, g: float, tr: FockTruncation) -> np.ndarray:
    """exp(-i t g B_3/2) on the 4(n_max+1)-dimensional block."""
    fn = SpinBlockFunctions(t * g)
    D = _Diag(tr)
    return np.block(
        [
            [D(fn.f2, 2), -1j * _S3 * D(fn.F1, 2, lower_by=1), 2 * _S3 * D(fn.h1, 2, lower_by=2), -6j * D(fn.H0, 2, lower_by=3)],
            [-1j * _S3 * D(fn.F1, 1, raise_by=1), D(fn.f1, 1), -2j * D(fn.H1, 1, lower_by=1), 2 * _S3 * D(fn.h1, 1, lower_by=2)],
            [2 * _S3 * D(fn.h1, 0, raise_by=2), -2j * D(fn.H1, 0, raise_by=1), D(fn.f0, 0), -1j * _S3 * D(fn.F0, 0, lower_by=1)],
            [-6j * D(fn.H0, -1, raise_by=3), 2 * _S3 * D(fn.h1, -1, raise_by=2), -1j * _S3 * D(fn.F0, -1, raise_by=1), D(fn.fm1, -1)],
        ]
    )


def _coeff(kind: str, n: int, N):
    lp, lm = lambdas(N)
    den = 2 * np.sqrt(d_of(N))
    vp, vm = v_coeffs(N)
    wp, wm = w_coeffs(N)
    if kind == "alpha":
        return (vp * lp**n - vm * lm**n) / den
    if kind == "beta":
        return (wp * lp**n - wm * lm**n) / den
    if kind == "gamma":
        return (vp * lm**n - vm * lp**n) / den
    if kind == "delta":
        return (wp * lm**n - wm * lp**n) / den
    if kind == "xi":
        return (lp**n - lm**n) / den
    raise ValueError(kind)


def keylemma_powers(n: int, tr: FockTruncation):
    """(B_3/2^(2n), B_3/2^(2n+1)) from the closed-form coefficient functions."""
    if not 0 <= n <= 8:
        raise ValueError("keylemma_powers verified for 0 <= n <= 8")
    D = _Diag(tr)

    def c(kind, m):
        return lambda M: _coeff(kind, m, M)

    Z = np.zeros((tr.dim, tr.dim), dtype=complex)
    even = np.block(
        [
            [D(c("alpha", n), 2), Z, 2 * _S3 * D(c("xi", n), 2, lower_by=2), Z],
            [Z, D(c("beta", n), 1), Z, 2 * _S3 * D(c("xi", n), 1, lower_by=2)],
            [2 * _S3 * D(c("xi", n), 0, raise_by=2), Z, D(c("gamma", n), 0), Z],
            [Z, 2 * _S3 * D(c("xi", n), -1, raise_by=2), Z, D(c("delta", n), -1)],
        ]
    )
    odd = np.block(
        [
            [Z, _S3 * D(c("beta", n), 2, lower_by=1), Z, 6 * D(c("xi", n), 2, lower_by=3)],
            [_S3 * D(c("beta", n), 1, raise_by=1), Z, 2 * D(c("xi", n + 1), 1, lower_by=1), Z],
            [Z, 2 * D(c("xi", n + 1), 0, raise_by=1), Z, _S3 * D(c("gamma", n), 0, lower_by=1)],
            [6 * D(c("xi", n), -1, raise_by=3), Z, _S3 * D(c("gamma", n), -1, raise_by=1), Z],
        ]
    )
    return even, odd


def _blockdiag(*mats) -> np.ndarray:
    size = sum(m.shape[0] for m in mats)
    out = np.zeros((size, size), dtype=complex)
    k = 0
    for m in mats:
        out[k : k + m.shape[0], k : k + m.shape[0]] = m
        k += m.shape[0]
    return out


def expm_full(n: int, t: float, g: float, tr: FockTruncation) -> Operator:
    """exp(-i t g A_n) assembled from the block exponentials."""
    if n == 1:
        return Operator(expm_spin_half(t, g, tr), 1, tr)
    dec = decomposition(n)
    if n == 2:
        inner = _blockdiag(np.eye(tr.dim, dtype=complex), expm_spin_one(t, g, tr))
    else:
        half = expm_spin_half(t, g, tr)
        inner = _blockdiag(half, half, expm_spin_three_half(t, g, tr))
    TT = dec.full_T(tr)
    return Operator(TT @ inner @ TT.T, n, tr)
