"""Driven Hamiltonian, interaction-picture generator and reduced generators.

Reduced generators act on the photon-ground sector written in the symmetry
adapted (phi) coordinates, i.e. the columns of T (x) |0>. Their entries are
kept as exact sums of exponentials so that the rotating wave approximation is
a term filter rather than a numerical average.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np

from .operators import (
    FockTruncation,
    Operator,
    collective,
    coupling_operator,
    ground_indices,
    number,
    pauli_embed,
    tensor,
)
from .spin import decomposition, expm_full, lambdas, v_coeffs, w_coeffs

log = logging.getLogger(__name__)

MAX_DRIVES = 3
EPS_FREQ = 1e-9  # in units of g


@dataclass(frozen=True)
class Drive:
    h: float = 0.0
    Omega: float = 0.0
    phi: float = 0.0


@dataclass(frozen=True)
class ModelParams:
    """Field frequency, atomic splitting, cavity coupling and one drive per atom."""

    omega: float = 1.0
    delta: float = 1.0
    g: float = 1.0
    drives: Tuple[Drive, ...] = ()

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError("coupling g must be positive")
        drives = tuple(d if isinstance(d, Drive) else Drive(*d) for d in self.drives)
        for d in drives:
            if d.h < 0:
                raise ValueError("drive amplitudes must be non-negative")
        object.__setattr__(self, "drives", drives)

    @property
    def resonant(self) -> bool:
        return bool(np.isclose(self.omega, self.delta, rtol=0, atol=1e-12 * max(1.0, abs(self.omega))))

    def drive(self, j: int) -> Drive:
        """Drive on atom j (1-based); absent drives are switched off."""
        return self.drives[j - 1] if j <= len(self.drives) else Drive()

    def with_drives(self, drives) -> "ModelParams":
        return ModelParams(self.omega, self.delta, self.g, tuple(drives))

    def to_dict(self) -> dict:
        return {
            "omega": self.omega,
            "delta": self.delta,
            "g": self.g,
            "drives": [{"h": d.h, "Omega": d.Omega, "phi": d.phi} for d in self.drives],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        drives = tuple(Drive(float(d["h"]), float(d["Omega"]), float(d["phi"])) for d in data.get("drives", []))
        return cls(float(data["omega"]), float(data["delta"]), float(data["g"]), drives)


@dataclass(frozen=True)
class ResonanceCondition:
    """Omega_j + omega = kappa * g for the drive on atom j."""

    drive: int
    kappa: float
    tag: str

    def omega_drive(self, g: float, omega: float) -> float:
        return self.kappa * g - omega


_R73 = np.sqrt(73.0)
RESONANCES = {
    "CZ2": ResonanceCondition(1, np.sqrt(2.0) + np.sqrt(6.0), "sqrt2+sqrt6"),
    "A": ResonanceCondition(1, np.sqrt(10.0 + _R73), "sqrt(10+sqrt73)"),
    "B": ResonanceCondition(1, 1.0 + np.sqrt(3.0), "1+sqrt3"),
    "C": ResonanceCondition(1, np.sqrt(3.0) + np.sqrt(10.0), "sqrt3+sqrt10"),
}


# -- exact sums of exponentials ------------------------------------------------


@dataclass(frozen=True)
class Term:
    """c * exp(i (theta t + phi)) with theta = sum_j m_j (Omega_j + omega) + k g.

    ``mult`` holds the drive multiplicities m_j and ``k`` the coefficient of g;
    together they are the provenance of the frequency. phi = sum_j m_j phi_j.
    """

    c: complex
    mult: Tuple[int, ...]
    k: float


@dataclass(frozen=True)
class TermSum:
    terms: Tuple[Term, ...] = ()
    params: Optional[ModelParams] = field(default=None, compare=False)

    # constructors
    @classmethod
    def const(cls, c, params=None) -> "TermSum":
        return cls((Term(complex(c), (0,) * MAX_DRIVES, 0.0),), params) if c != 0 else cls((), params)

    @classmethod
    def drive(cls, j: int, params: ModelParams) -> "TermSum":
        """p, q or r: h_j exp(i ((Omega_j + omega) t + phi_j)) for atom j."""
        d = params.drive(j)
        if d.h == 0:
            return cls((), params)
        mult = tuple(1 if i == j - 1 else 0 for i in range(MAX_DRIVES))
        return cls((Term(complex(d.h), mult, 0.0),), params)

    @classmethod
    def cos(cls, k: float, params=None) -> "TermSum":
        """cos(k g t)."""
        z = (0,) * MAX_DRIVES
        return cls((Term(0.5, z, k), Term(0.5, z, -k)), params).normalized()

    @classmethod
    def sin(cls, k: float, params=None) -> "TermSum":
        """sin(k g t)."""
        z = (0,) * MAX_DRIVES
        return cls((Term(-0.5j, z, k), Term(0.5j, z, -k)), params).normalized()

    # frequency bookkeeping
    def _params(self, other=None) -> Optional[ModelParams]:
        return self.params if self.params is not None else getattr(other, "params", None)

    def theta(self, term: Term, params: Optional[ModelParams] = None) -> float:
        p = params or self.params
        g = p.g if p else 1.0
        th = term.k * g
        for j, m in enumerate(term.mult):
            if m:
                th += m * (p.drive(j + 1).Omega + p.omega)
        return th

    def phase(self, term: Term, params: Optional[ModelParams] = None) -> float:
        p = params or self.params
        return sum(m * p.drive(j + 1).phi for j, m in enumerate(term.mult) if m)

    def triples(self):
        """(c, theta, phi) for each term."""
        return [(t.c, self.theta(t), self.phase(t)) for t in self.terms]

    # arithmetic
    def normalized(self, eps: float = EPS_FREQ) -> "TermSum":
        groups: Dict[Tuple[int, ...], list] = {}
        for t in self.terms:
            groups.setdefault(t.mult, []).append(t)
        out = []
        for mult in sorted(groups):
            ts = sorted(groups[mult], key=lambda t: t.k)
            merged = []
            for t in ts:
                if merged and abs(t.k - merged[-1][1]) < eps:
                    c, k, scale = merged[-1]
                    merged[-1] = (c + t.c, k, max(scale, abs(t.c)))
                else:
                    merged.append((t.c, t.k, abs(t.c)))
            for c, k, scale in merged:
                # exact cancellation up to rounding
                if abs(c) > 1e-14 * scale:
                    out.append(Term(c, mult, k))
        return TermSum(tuple(out), self.params)

    def __add__(self, other) -> "TermSum":
        if not isinstance(other, TermSum):
            other = TermSum.const(other)
        return TermSum(self.terms + other.terms, self._params(other)).normalized()

    __radd__ = __add__

    def __neg__(self) -> "TermSum":
        return self * -1

    def __sub__(self, other) -> "TermSum":
        return self + (-other if isinstance(other, TermSum) else -complex(other))

    def __mul__(self, other) -> "TermSum":
        if not isinstance(other, TermSum):
            c = complex(other)
            if c == 0:
                return TermSum((), self.params)
            return TermSum(tuple(Term(t.c * c, t.mult, t.k) for t in self.terms), self.params)
        terms = [
            Term(a.c * b.c, tuple(x + y for x, y in zip(a.mult, b.mult)), a.k + b.k)
            for a in self.terms
            for b in other.terms
        ]
        return TermSum(tuple(terms), self._params(other)).normalized()

    __rmul__ = __mul__

    def __truediv__(self, c) -> "TermSum":
        return self * (1.0 / complex(c))

    def conj(self) -> "TermSum":
        return TermSum(tuple(Term(t.c.conjugate(), tuple(-m for m in t.mult), -t.k) for t in self.terms), self.params)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        for c, th, ph in self.triples():
            out = out + c * np.exp(1j * (th * t + ph))
        return out

    def __len__(self):
        return len(self.terms)

    def is_zero(self) -> bool:
        return len(self.terms) == 0

    def equals(self, other: "TermSum", tol: float = 1e-14) -> bool:
        diff = (self - other).terms
        return all(abs(t.c) <= tol for t in diff)


# -- scalar block functions as term sums ----------------------------------------
#
# Each is a fixed photon-number instance of the spin-block functions; frequencies
# are multiples of g.


def _sqrt_nonneg(lam: float) -> float:
    return float(np.sqrt(max(lam, 0.0)))


def _cos_lin(items, den, params):
    # sum_i c_i cos(sqrt(lam_i) g t) / den, dropping exact zeros
    out = TermSum((), params)
    for c, lam in items:
        if c != 0:
            out = out + TermSum.cos(_sqrt_nonneg(lam), params) * (c / den)
    return out


def _sinc_lin(items, den, params):
    # sum_i c_i sin(sqrt(lam_i) g t) / sqrt(lam_i) / den; only lam > 0 is used here
    out = TermSum((), params)
    for c, lam in items:
        if c != 0:
            r = _sqrt_nonneg(lam)
            out = out + TermSum.sin(r, params) * (c / (r * den))
    return out


def scalar_table(params: ModelParams) -> Dict[str, TermSum]:
    """Block functions at the photon arguments that enter the reduced generators."""
    p = params

    def spin32(name, M):
        lp, lm = (float(x) for x in lambdas(M))
        vp, vm = (float(x) for x in v_coeffs(M))
        wp, wm = (float(x) for x in w_coeffs(M))
        den = 2 * np.sqrt(16 * M * M + 9)
        if name == "f2":
            return _cos_lin([(vp, lp), (-vm, lm)], den, p)
        if name == "f1":
            return _cos_lin([(wp, lp), (-wm, lm)], den, p)
        if name == "f0":
            return _cos_lin([(vp, lm), (-vm, lp)], den, p)
        if name == "fm1":
            return _cos_lin([(wp, lm), (-wm, lp)], den, p)
        if name == "h1":
            return _cos_lin([(1.0, lp), (-1.0, lm)], den, p)
        if name == "F1":
            return _sinc_lin([(wp, lp), (-wm, lm)], den, p)
        if name == "F0":
            return _sinc_lin([(vp, lm), (-vm, lp)], den, p)
        if name == "H1":
            # sqrt(lam) sin(sqrt(lam) x)
            out = TermSum((), p)
            for c, lam in ((1.0, lp), (-1.0, lm)):
                r = _sqrt_nonneg(lam)
                if r:
                    out = out + TermSum.sin(r, p) * (c * r / den)
            return out
        raise KeyError(name)

    def f_one(N):
        return (TermSum.cos(np.sqrt(2 * (2 * N + 1)), p) - 1) / 2

    def h_one(N):
        return TermSum.sin(np.sqrt(2 * (2 * N + 1)), p) / np.sqrt(2 * N + 1)

    table = {
        # two atoms
        "f(0)": f_one(0),
        "f(1)": f_one(1),
        "h(0)": h_one(0),
        "h(1)": h_one(1),
        # three atoms
        "C(0)": TermSum.const(1.0, p),
        "C(1)": TermSum.cos(1.0, p),
        "S(1)": TermSum.sin(1.0, p),
        "f-1(-1)": spin32("fm1", -1),
        "f0(0)": spin32("f0", 0),
        "f1(1)": spin32("f1", 1),
        "f2(2)": spin32("f2", 2),
        "F0(0)": spin32("F0", 0),
        "F1(2)": spin32("F1", 2),
        "h1(1)": spin32("h1", 1),
        "h1(2)": spin32("h1", 2),
        "H1(1)": spin32("H1", 1),
    }
    # f3(1), f3(2) are alternative names for h1(1), h1(2)
    table["f3(1)"] = table["h1(1)"]
    table["f3(2)"] = table["h1(2)"]
    return table


# -- reduced generators -------------------------------------------------------


@dataclass(frozen=True)
class ReducedGenerator:
    """Matrix of TermSums on the photon-ground phi coordinates (0-based keys)."""

    dim: int
    entries: Dict[Tuple[int, int], TermSum]
    params: ModelParams

    def entry(self, i: int, j: int) -> TermSum:
        """1-based (row, column) entry, empty when structurally zero."""
        return self.entries.get((i - 1, j - 1), TermSum((), self.params))

    def support(self):
        return sorted(k for k, v in self.entries.items() if not v.is_zero())

    def __call__(self, t: float) -> np.ndarray:
        X = np.zeros((self.dim, self.dim), dtype=complex)
        for (i, j), ts in self.entries.items():
            X[i, j] = ts(t)
        return X

    def is_hermitian(self, tol: float = 1e-14) -> bool:
        keys = set(self.entries) | {(j, i) for i, j in self.entries}
        for i, j in keys:
            a = self.entries.get((i, j), TermSum((), self.params))
            b = self.entries.get((j, i), TermSum((), self.params))
            if not a.equals(b.conj(), tol):
                return False
        return True


def _fill(dim, listed, mirrored, params):
    entries = {}
    for (i, j), ts in listed.items():
        entries[(i - 1, j - 1)] = ts
    for (i, j), (k, l) in mirrored.items():
        entries[(i - 1, j - 1)] = listed[(k, l)].conj()
    return ReducedGenerator(dim, entries, params)


def reduced_generator_two(params: ModelParams) -> ReducedGenerator:
    p_, q_ = TermSum.drive(1, params), TermSum.drive(2, params)
    s = scalar_table(params)
    f0, f1, h0, h1 = s["f(0)"], s["f(1)"], s["h(0)"], s["h(1)"]
    r2 = np.sqrt(2.0)
    listed = {
        (1, 4): (p_ - q_) / r2,
        (2, 1): (q_ - p_) / r2 * (1 + f1 * (2 / 3)),
        (2, 3): (p_ + q_) / r2 * (1 + f0 * 2 + f1 * (2 / 3) + f0 * f1 * (4 / 3) + h0 * h1),
        (3, 4): (p_ + q_) / r2 * (1 + f0 * 2),
    }
    mirrored = {(1, 2): (2, 1), (3, 2): (2, 3), (4, 1): (1, 4), (4, 3): (3, 4)}
    return _fill(4, listed, mirrored, params)


def reduced_generator_three(params: ModelParams) -> ReducedGenerator:
    p_, q_, r_ = (TermSum.drive(j, params) for j in (1, 2, 3))
    s = scalar_table(params)
    C0, C1, S1 = s["C(0)"], s["C(1)"], s["S(1)"]
    fm1, f00, f11, f22 = s["f-1(-1)"], s["f0(0)"], s["f1(1)"], s["f2(2)"]
    F00, F12, h11, h12, H11 = s["F0(0)"], s["F1(2)"], s["h1(1)"], s["h1(2)"], s["H1(1)"]
    r2, r3, r6 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(6.0)
    qmr = q_ - r_
    two_p = p_ * 2 - q_ - r_
    tot = p_ + q_ + r_
    g_17 = f00 * C1 + F00 * S1 * 3
    g_51 = C1 * f22 + S1 * F12
    listed = {
        (1, 2): p_ * C0 * C1,
        (1, 4): qmr / r3 * C0 * C1,
        (1, 7): qmr / r6 * g_17,
        (2, 8): qmr / r2 * fm1 * C0,
        (3, 2): qmr / r3 * C0 * C1,
        (3, 4): (q_ * 2 + r_ * 2 - p_) / 3 * C0 * C1,
        (3, 7): two_p / (3 * r2) * g_17,
        (4, 8): two_p / r6 * fm1 * C0,
        (5, 1): -qmr / r2 * g_51,
        (5, 3): -two_p / r6 * g_51,
        (5, 6): tot / r3 * (f11 * f22 + H11 * F12 * 4 + h11 * h12 * 24),
        # 1/sqrt6 rather than 1/sqrt2: the conjugated drive reaches phi_2 with weight 1/sqrt6
        (6, 2): -qmr / r6 * C0 * f11,
        (6, 4): -two_p / (3 * r2) * C0 * f11,
        (6, 7): tot * (2 / 3) * (f00 * f11 + F00 * H11 * 3),
        (7, 8): tot / r3 * fm1 * f00,
    }
    mirrored = {
        (1, 5): (5, 1), (2, 1): (1, 2), (2, 3): (3, 2), (2, 6): (6, 2), (3, 5): (5, 3),
        (4, 1): (1, 4), (4, 3): (3, 4), (4, 6): (6, 4), (6, 5): (5, 6), (7, 1): (1, 7),
        (7, 3): (3, 7), (7, 6): (6, 7), (8, 2): (2, 8), (8, 4): (4, 8), (8, 7): (7, 8),
    }
    return _fill(8, listed, mirrored, params)


def reduced_generator(n: int, params: ModelParams) -> ReducedGenerator:
    if n == 2:
        return reduced_generator_two(params)
    if n == 3:
        return reduced_generator_three(params)
    raise ValueError(f"reduced generator defined for n in (2, 3), got {n}")


# -- rotating wave approximation --------------------------------------------------


@dataclass(frozen=True)
class FilteredGenerator:
    matrix: np.ndarray
    survivors: Tuple[Tuple[int, int], ...]  # 0-based
    near_secular: Tuple[dict, ...]
    empty: bool


def rwa_filter(genr: ReducedGenerator, res: ResonanceCondition, eps: float = EPS_FREQ) -> FilteredGenerator:
    """Keep only the terms whose frequency vanishes under the resonance relation."""
    p = genr.params
    g = p.g
    X = np.zeros((genr.dim, genr.dim), dtype=complex)
    survivors = []
    near = []
    j = res.drive - 1
    for (a, b), ts in sorted(genr.entries.items()):
        hit = False
        for term in ts.terms:
            th = term.k * g
            for i, m in enumerate(term.mult):
                if m:
                    th += m * (res.kappa * g if i == j else p.drive(i + 1).Omega + p.omega)
            if abs(th) < eps * g:
                X[a, b] += term.c * np.exp(1j * ts.phase(term, p))
                hit = True
            elif abs(th) < 100 * eps * g:
                near.append({"entry": (a, b), "theta": th, "amplitude": abs(term.c)})
                log.warning("near-secular term dropped at %s: theta=%.3e", (a, b), th)
        if hit:
            survivors.append((a, b))
    return FilteredGenerator(X, tuple(survivors), tuple(near), not survivors)


# -- full-space operators ---------------------------------------------------------


def _check_drives(n: int, params: ModelParams):
    if len(params.drives) > n:
        raise ValueError(f"{len(params.drives)} drives given for {n} atoms")


def drive_atom_operator(n: int, amplitudes) -> np.ndarray:
    """sum_j c_j sigma_+^(j) + h.c. on the atoms, for complex c_j."""
    M = np.zeros((2 ** n, 2 ** n), dtype=complex)
    for j, c in enumerate(amplitudes, start=1):
        if c != 0:
            M += c * pauli_embed("+", j, n).data
    return M + M.conj().T


def build_hamiltonian(n: int, params: ModelParams, tr: FockTruncation):
    """H(t) = omega N + Delta S_3 + g A_n + V(t) as a callable returning dense matrices."""
    if n not in (1, 2, 3):
        raise ValueError("n must be 1, 2 or 3")
    _check_drives(n, params)
    eye_ph = Operator(np.eye(tr.dim), 0, tr)
    H0 = (
        params.omega * tensor(Operator(np.eye(2 ** n), n), number(tr)).data
        + params.delta * tensor(collective("3", n), eye_ph).data
        + params.g * coupling_operator(n, tr).data
    )
    eye = np.eye(tr.dim)

    def H(t: float) -> np.ndarray:
        amps = [d.h * np.exp(1j * (d.Omega * t + d.phi)) for d in params.drives]
        return H0 + np.kron(drive_atom_operator(n, amps), eye)

    H.static = H0
    return H


def rotated_drive_amplitudes(params: ModelParams, t: float):
    """p(t), q(t), r(t) in the frame rotating with omega K."""
    return [d.h * np.exp(1j * ((d.Omega + params.omega) * t + d.phi)) for d in params.drives]


def interaction_generator(n: int, params: ModelParams, tr: FockTruncation, t: float) -> Operator:
    """F(t) = exp(i t g A) V~(t) exp(-i t g A)."""
    if not params.resonant:
        raise ValueError("interaction picture requires omega == delta")
    _check_drives(n, params)
    E = expm_full(n, t, params.g, tr).data
    Vt = np.kron(drive_atom_operator(n, rotated_drive_amplitudes(params, t)), np.eye(tr.dim))
    return Operator(E.conj().T @ Vt @ E, n, tr)


def project_ground_phi(n: int, X, tr: FockTruncation) -> np.ndarray:
    """<phi_i, 0| X |phi_j, 0> for the phi coordinates of n atoms."""
    data = X.data if isinstance(X, Operator) else np.asarray(X)
    TT = decomposition(n).full_T(tr)
    G = TT.T @ data @ TT
    idx = ground_indices(n, tr)
    return G[np.ix_(idx, idx)]


def reduced_numeric(n: int, params: ModelParams, tr: FockTruncation, t: float) -> np.ndarray:
    """Numerical counterpart of the reduced generator at time t."""
    return project_ground_phi(n, interaction_generator(n, params, tr, t), tr)
