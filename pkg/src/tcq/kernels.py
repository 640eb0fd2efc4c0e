"""Fixed-step RK4 kernels for the interaction-picture equation.

The state is stored in the eigenbasis of g A, grouped by excitation sector.
In those coordinates the generator is D(t) M(t) D(t)^dagger with
D = diag(exp(i g lambda t)) and M(t) = sum_j c_j(t) S_j + conj(c_j(t)) S_j^T,
where each real S_j maps sector s into sector s + 1. Only the nonzero
sector-to-sector blocks are stored, padded to a common size.

Two interchangeable backends are provided. The numba one is used when numba
imports and ``TCQ_BACKEND`` is not set to ``numpy``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f


RESYNC = 256  # steps between exact re-evaluation of the phase factors


def backend_name() -> str:
    want = os.environ.get("TCQ_BACKEND", "").strip().lower()
    if want not in ("", "numba", "numpy"):
        raise ValueError(f"TCQ_BACKEND must be 'numba' or 'numpy', got {want!r}")
    if want == "numpy" or not HAVE_NUMBA:
        return "numpy"
    return "numba"


# -- numba backend -------------------------------------------------------------


@njit(cache=True, fastmath=True)
def _apply_blocks(X, U, V, offs, sizes, bl):
    # U = S X, V = S^T X on real views (columns = re/im interleaved)
    w2 = X.shape[1]
    for i in range(U.shape[0]):
        for k in range(w2):
            U[i, k] = 0.0
            V[i, k] = 0.0
    for s in range(sizes.shape[0] - 1):
        o0 = offs[s]
        o1 = offs[s + 1]
        for a in range(sizes[s + 1]):
            for b in range(sizes[s]):
                w = bl[s, a, b]
                if w != 0.0:
                    for k in range(w2):
                        U[o1 + a, k] += w * X[o0 + b, k]
                        V[o0 + b, k] += w * X[o1 + a, k]


@njit(cache=True)
def _stage(Z, kprev, f, ph, X, U, V, out, offs, sizes, blocks, cs):
    d, m = Z.shape
    for i in range(d):
        pc = ph[i].conjugate()
        for q in range(m):
            X[i, q] = (Z[i, q] + f * kprev[i, q]) * pc
    Xr = X.view(np.float64)
    Ur = U.view(np.float64)
    Vr = V.view(np.float64)
    for i in range(d):
        for q in range(m):
            out[i, q] = 0.0
    for j in range(cs.shape[0]):
        c = cs[j]
        if c == 0:
            continue
        cc = c.conjugate()
        _apply_blocks(Xr, Ur, Vr, offs, sizes, blocks[j])
        for i in range(d):
            for q in range(m):
                out[i, q] += c * U[i, q] + cc * V[i, q]
    for i in range(d):
        pm = -1j * ph[i]
        for q in range(m):
            out[i, q] *= pm


@njit(cache=True)
def _rk4_numba(Z, lam_g, offs, sizes, blocks, amps, freqs, t0, dt, nsteps):
    d, m = Z.shape
    ndr = amps.shape[0]
    k1 = np.zeros_like(Z)
    k2 = np.zeros_like(Z)
    k3 = np.zeros_like(Z)
    k4 = np.zeros_like(Z)
    X = np.empty_like(Z)
    U = np.empty_like(Z)
    V = np.empty_like(Z)
    ph0 = np.empty(d, np.complex128)
    phh = np.empty(d, np.complex128)
    ph1 = np.empty(d, np.complex128)
    rot = np.empty(d, np.complex128)
    for i in range(d):
        rot[i] = np.exp(0.5j * lam_g[i] * dt)
    cs = np.empty(ndr, np.complex128)
    for step in range(nsteps):
        t = t0 + step * dt
        if step % RESYNC == 0:
            for i in range(d):
                ph0[i] = np.exp(1j * lam_g[i] * t)
        for i in range(d):
            phh[i] = ph0[i] * rot[i]
            ph1[i] = phh[i] * rot[i]
        for j in range(ndr):
            cs[j] = amps[j] * np.exp(1j * freqs[j] * t)
        _stage(Z, k1, 0.0, ph0, X, U, V, k1, offs, sizes, blocks, cs)
        for j in range(ndr):
            cs[j] = amps[j] * np.exp(1j * freqs[j] * (t + 0.5 * dt))
        _stage(Z, k1, 0.5 * dt, phh, X, U, V, k2, offs, sizes, blocks, cs)
        _stage(Z, k2, 0.5 * dt, phh, X, U, V, k3, offs, sizes, blocks, cs)
        for j in range(ndr):
            cs[j] = amps[j] * np.exp(1j * freqs[j] * (t + dt))
        _stage(Z, k3, dt, ph1, X, U, V, k4, offs, sizes, blocks, cs)
        w = dt / 6.0
        for i in range(d):
            for q in range(m):
                Z[i, q] += w * (k1[i, q] + 2.0 * (k2[i, q] + k3[i, q]) + k4[i, q])
        for i in range(d):
            ph0[i] = ph1[i]
    return Z


# -- numpy backend -------------------------------------------------------------


def _rk4_numpy(Z, lam_g, offs, sizes, blocks, amps, freqs, t0, dt, nsteps):
    nsec = sizes.shape[0]
    bmax = blocks.shape[-1]
    d, m = Z.shape
    # padded (sector, slot) layout so the block products batch into one matmul
    rows = np.concatenate([offs[s] + np.arange(sizes[s]) for s in range(nsec)])
    slot = np.concatenate([s * bmax + np.arange(sizes[s]) for s in range(nsec)])
    lam_p = np.zeros(nsec * bmax)
    lam_p[slot] = lam_g[rows]
    Zp = np.zeros((nsec * bmax, m), dtype=complex)
    Zp[slot] = Z[rows]
    live = [j for j in range(amps.shape[0]) if amps[j] != 0]
    Bt = {j: np.ascontiguousarray(np.swapaxes(blocks[j], 1, 2)) for j in live}

    def rhs(Y, t):
        ph = np.exp(1j * lam_p * t)[:, None]
        X = (Y * ph.conj()).reshape(nsec, bmax, m)
        acc = np.zeros_like(X)
        for j in live:
            c = amps[j] * np.exp(1j * freqs[j] * t)
            acc[1:] += c * (blocks[j] @ X[:-1])
            acc[:-1] += np.conj(c) * (Bt[j] @ X[1:])
        return -1j * ph * acc.reshape(nsec * bmax, m)

    for step in range(nsteps):
        t = t0 + step * dt
        k1 = rhs(Zp, t)
        k2 = rhs(Zp + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = rhs(Zp + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = rhs(Zp + dt * k3, t + dt)
        Zp = Zp + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    Z[rows] = Zp[slot]
    return Z


def rk4_propagate(Z, lam_g, offs, sizes, blocks, amps, freqs, t0, dt, nsteps, backend=None):
    """Advance Z in place by ``nsteps`` RK4 steps of size ``dt`` from ``t0``.

    Drive j contributes c_j(t) = amps[j] * exp(i freqs[j] t).
    """
    backend = backend or backend_name()
    args = (
        Z,
        np.ascontiguousarray(lam_g, dtype=float),
        np.ascontiguousarray(offs, dtype=np.int64),
        np.ascontiguousarray(sizes, dtype=np.int64),
        np.ascontiguousarray(blocks, dtype=float),
        np.ascontiguousarray(amps, dtype=complex),
        np.ascontiguousarray(freqs, dtype=float),
        float(t0),
        float(dt),
        int(nsteps),
    )
    if backend == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is not importable")
        return _rk4_numba(*args)
    if backend == "numpy":
        return _rk4_numpy(*args)
    raise ValueError(f"unknown backend {backend!r}")
