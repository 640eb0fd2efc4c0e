"""Truncated photon and multi-atom spin operators.

Basis ordering is atom 1 outermost, then atom 2, ..., with the photon number
as the fastest-running index. The single-atom basis is (|+>, |->), so
sigma_+ = [[0, 1], [0, 0]] raises |-> to |+>.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

SUPPORTED_ATOMS = (1, 2, 3)

_SIGMA = {
    "+": np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex),
    "-": np.array([[0.0, 0.0], [1.0, 0.0]], dtype=complex),
    "3": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
    "1": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "id": np.eye(2, dtype=complex),
}


@dataclass(frozen=True)
class FockTruncation:
    """Photon-number cutoff plus the number of top levels masked in comparisons."""

    n_max: int = 40
    buffer: int = 8

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")
        if int(self.buffer) != self.buffer or self.buffer < 0:
            raise ValueError(f"buffer must be an integer >= 0, got {self.buffer!r}")
        if self.n_max < self.buffer + 1:
            raise ValueError("n_max must be at least buffer + 1")

    @property
    def dim(self) -> int:
        return self.n_max + 1

    def numbers(self) -> np.ndarray:
        """Photon numbers 0..n_max as floats."""
        return np.arange(self.dim, dtype=float)


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense matrix tagged with the atom count and optional photon truncation."""

    data: np.ndarray
    n_atoms: int = 0
    fock: Optional[FockTruncation] = None

    def __post_init__(self):
        arr = np.array(self.data, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"operator data must be square, got shape {arr.shape}")
        expected = 2 ** self.n_atoms * (self.fock.dim if self.fock else 1)
        if arr.shape[0] != expected:
            raise ValueError(f"dimension {arr.shape[0]} does not match metadata ({expected})")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def dagger(self) -> "Operator":
        return Operator(self.data.conj().T, self.n_atoms, self.fock)

    def _check(self, other: "Operator"):
        if other.n_atoms != self.n_atoms or other.fock != self.fock:
            raise ValueError("operators live on different spaces")

    def __matmul__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.data @ other.data, self.n_atoms, self.fock)

    def __add__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.data + other.data, self.n_atoms, self.fock)

    def __sub__(self, other: "Operator") -> "Operator":
        self._check(other)
        return Operator(self.data - other.data, self.n_atoms, self.fock)

    def __mul__(self, c) -> "Operator":
        return Operator(complex(c) * self.data, self.n_atoms, self.fock)

    __rmul__ = __mul__

    def is_hermitian(self, tol: float = 0.0) -> bool:
        return bool(np.abs(self.data - self.data.conj().T).max() <= tol)


def annihilation(tr: FockTruncation) -> Operator:
    a = np.diag(np.sqrt(np.arange(1, tr.dim, dtype=float)), 1)
    return Operator(a, 0, tr)


def creation(tr: FockTruncation) -> Operator:
    return annihilation(tr).dagger()


def number(tr: FockTruncation) -> Operator:
    return Operator(np.diag(tr.numbers()), 0, tr)


def pauli_embed(which: str, j: int, n: int) -> Operator:
    """Single-atom operator ``which`` acting on atom ``j`` (1-based) of ``n``."""
    if which not in _SIGMA:
        raise ValueError(f"unknown single-atom operator {which!r}")
    if not 1 <= j <= n:
        raise ValueError(f"atom index {j} out of range 1..{n}")
    out = np.eye(1, dtype=complex)
    for k in range(1, n + 1):
        out = np.kron(out, _SIGMA[which] if k == j else _SIGMA["id"])
    return Operator(out, n)


def collective(which: str, n: int) -> Operator:
    """S_+, S_- or S_3 (the latter with the factor 1/2 per atom)."""
    if which not in ("+", "-", "3"):
        raise ValueError(f"collective operator must be '+', '-' or '3', got {which!r}")
    if n < 1:
        raise ValueError("need at least one atom")
    total = sum(pauli_embed(which, j, n).data for j in range(1, n + 1))
    if which == "3":
        total = 0.5 * total
    return Operator(total, n)


def tensor(atom_op: Operator, photon_op: Operator) -> Operator:
    """Atom operator (x) photon operator in the package basis ordering."""
    if photon_op.fock is None or photon_op.n_atoms != 0:
        raise ValueError("second factor must be a pure photon operator")
    if atom_op.fock is not None:
        raise ValueError("first factor must be a pure atom operator")
    return Operator(np.kron(atom_op.data, photon_op.data), atom_op.n_atoms, photon_op.fock)


def atom_to_full(atom_op: Operator, tr: FockTruncation) -> Operator:
    return tensor(atom_op, Operator(np.eye(tr.dim), 0, tr))


def coupling_operator(n: int, tr: FockTruncation) -> Operator:
    """A_n = S_+ (x) a + S_- (x) a^dagger."""
    if n not in SUPPORTED_ATOMS:
        raise ValueError(f"coupling operator supported for n in {SUPPORTED_ATOMS}, got {n}")
    a = annihilation(tr)
    return tensor(collective("+", n), a) + tensor(collective("-", n), a.dagger())


def excitation_operator(n: int, tr: FockTruncation) -> Operator:
    """K = S_3 (x) 1 + 1 (x) N, conserved by the coupling operator."""
    eye_atoms = Operator(np.eye(2 ** n), n)
    return tensor(collective("3", n), Operator(np.eye(tr.dim), 0, tr)) + tensor(eye_atoms, number(tr))


def buffer_mask(n_atoms: int, tr: FockTruncation) -> np.ndarray:
    """Boolean mask over the full basis that drops the top ``buffer`` photon levels."""
    keep = np.arange(tr.dim) < tr.dim - tr.buffer
    return np.tile(keep, 2 ** n_atoms)


def masked(X, n_atoms: int, tr: FockTruncation) -> np.ndarray:
    data = X.data if isinstance(X, Operator) else np.asarray(X)
    m = buffer_mask(n_atoms, tr)
    return data[np.ix_(m, m)]


def ground_indices(n_atoms: int, tr: FockTruncation) -> np.ndarray:
    """Full-space indices of |atoms> (x) |0> for each of the 2^n atom states."""
    return np.arange(2 ** n_atoms) * tr.dim


# Taylor core for scaling and squaring: with ||Y||_1 <= 1/2 the remainder after
# 24 terms is below 1e-23 relative, so the core is exact to rounding.
_TAYLOR_TERMS = 24
_THETA = 0.5


def oracle_expm(X, scale: complex = 1.0):
    """exp(scale * X) by scaling and squaring around a truncated Taylor series.

    Deliberately independent of any library matrix exponential so that it can
    serve as a reference for the closed forms. Accepts an Operator or array
    and returns the same kind.
    """
    is_op = isinstance(X, Operator)
    M = np.asarray(X.data if is_op else X, dtype=complex) * complex(scale)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("oracle_expm needs a square matrix")
    if not np.all(np.isfinite(M)):
        raise ValueError("oracle_expm: non-finite entries")
    norm = np.abs(M).sum(axis=0).max() if M.size else 0.0
    s = 0 if norm <= _THETA else int(np.ceil(np.log2(norm / _THETA)))
    Y = M / 2.0 ** s
    eye = np.eye(M.shape[0], dtype=complex)
    # Horner evaluation of sum_k Y^k / k!
    E = eye.copy()
    for k in range(_TAYLOR_TERMS, 0, -1):
        E = eye + (Y @ E) / k
    for _ in range(s):
        E = E @ E
    if is_op:
        return Operator(E, X.n_atoms, X.fock)
    return E
