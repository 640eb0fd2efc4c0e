"""Time integration of the interaction-picture equation and gate extraction.

Only the 2^n columns of U_0 that start in the embedded qubit subspace are
propagated; they are all the extraction and leakage figures need.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import List, Optional, Sequence

import numpy as np

from . import gates as G
from .interaction import ModelParams
from .kernels import backend_name, rk4_propagate
from .operators import FockTruncation, coupling_operator, pauli_embed
from .pulses import N_ATOMS, PulseSchedule, Segment, design

log = logging.getLogger(__name__)

SCHEMA = "tcq/1"
STABILITY = 0.1


class SimulationError(RuntimeError):
    """Integrator guard violation or non-finite state."""


@dataclass(frozen=True)
class SimulationConfig:
    params: ModelParams = field(default_factory=ModelParams)
    tr: FockTruncation = field(default_factory=FockTruncation)
    step: float = 1e-3
    photon_init: int = 0
    report_grid: int = 0
    backend: Optional[str] = None

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not 0 <= self.photon_init <= self.tr.n_max - self.tr.buffer:
            raise ValueError("photon_init must lie below the masked buffer")
        if self.report_grid < 0:
            raise ValueError("report_grid must be >= 0")

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "n_max": self.tr.n_max,
            "buffer": self.tr.buffer,
            "step": self.step,
            "photon_init": self.photon_init,
            "report_grid": self.report_grid,
        }


# -- sector eigenbasis -------------------------------------------------------------


@dataclass(frozen=True)
class SectorBasis:
    """Eigenbasis of A grouped by excitation number s = (#excited atoms) + N."""

    n: int
    tr: FockTruncation
    perm: np.ndarray  # full-space index of each sector-ordered slot
    W: np.ndarray  # real orthogonal, rows = sector-ordered slots
    lam: np.ndarray
    offs: np.ndarray
    sizes: np.ndarray
    blocks: np.ndarray  # (n, nsec - 1, bmax, bmax): W^T sigma_+^(j) W, s -> s + 1

    @property
    def dim(self) -> int:
        return self.perm.size


def _excitations(n: int, tr: FockTruncation) -> np.ndarray:
    # |+> is index 0 of each atom
    atoms = np.array([n - bin(b).count("1") for b in range(2 ** n)])
    return (atoms[:, None] + np.arange(tr.dim)[None, :]).ravel()


@lru_cache(maxsize=16)
def sector_basis(n: int, tr: FockTruncation) -> SectorBasis:
    A = coupling_operator(n, tr).data.real
    exc = _excitations(n, tr)
    nsec = int(exc.max()) + 1
    members = [np.flatnonzero(exc == s) for s in range(nsec)]
    sizes = np.array([m.size for m in members], dtype=np.int64)
    offs = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    perm = np.concatenate(members)
    Wb, lam = [], []
    for m in members:
        w, v = np.linalg.eigh(A[np.ix_(m, m)])
        Wb.append(v)
        lam.append(w)
    bmax = int(sizes.max())
    blocks = np.zeros((n, nsec - 1, bmax, bmax))
    for j in range(1, n + 1):
        sp = np.kron(pauli_embed("+", j, n).data.real, np.eye(tr.dim))
        for s in range(nsec - 1):
            S = Wb[s + 1].T @ sp[np.ix_(members[s + 1], members[s])] @ Wb[s]
            blocks[j - 1, s, : sizes[s + 1], : sizes[s]] = S
    W = np.zeros((perm.size, perm.size))
    for s in range(nsec):
        W[offs[s] : offs[s + 1], offs[s] : offs[s + 1]] = Wb[s]
    return SectorBasis(n, tr, perm, W, np.concatenate(lam), offs, sizes, blocks)


def embedded_indices(n: int, tr: FockTruncation, photon: int = 0) -> np.ndarray:
    return np.arange(2 ** n) * tr.dim + photon


# -- integration ---------------------------------------------------------------------


@dataclass
class Propagation:
    """Columns of U_0 started in the embedded qubit subspace, in full-space order."""

    n: int
    columns: np.ndarray
    t: float
    steps: int
    samples: List[dict] = field(default_factory=list)

    @property
    def isometry_defect(self) -> float:
        C = self.columns
        return float(np.abs(C.conj().T @ C - np.eye(C.shape[1])).max())


def _segment_drives(seg: Segment, n: int, params: ModelParams):
    amps = np.zeros(n, dtype=complex)
    freqs = np.zeros(n)
    amps[seg.drive - 1] = seg.h * np.exp(1j * seg.phi)
    freqs[seg.drive - 1] = seg.omega + params.omega
    return amps, freqs


def _check_stability(cfg: SimulationConfig, seg: Segment):
    # ||F(t)|| <= sum_j h_j for sigma_+ and sigma_- drives on distinct atoms
    if cfg.step * seg.h >= STABILITY:
        raise SimulationError(
            f"stability guard: step * ||F|| = {cfg.step * seg.h:.3g} >= {STABILITY}"
        )


def integrate(cfg: SimulationConfig, segments: Sequence[Segment], n: int,
              start: Optional[np.ndarray] = None) -> Propagation:
    """RK4 integration of i dU/dt = F(t) U through contiguous segments.

    Segment durations are split into whole steps of at most ``cfg.step``.
    """
    if not cfg.params.resonant:
        raise ValueError("the interaction picture used here requires omega == delta")
    sb = sector_basis(n, cfg.tr)
    idx = embedded_indices(n, cfg.tr, cfg.photon_init)
    if start is None:
        Y = np.zeros((sb.dim, idx.size), dtype=complex)
        Y[idx, np.arange(idx.size)] = 1.0
    else:
        Y = np.array(start, dtype=complex)
    inv = np.empty_like(sb.perm)
    inv[sb.perm] = np.arange(sb.perm.size)
    Z = np.ascontiguousarray(sb.W.T @ Y[sb.perm])
    lam_g = cfg.params.g * sb.lam
    backend = cfg.backend or backend_name()
    t = 0.0
    steps = 0
    samples = []
    for seg in segments:
        _check_stability(cfg, seg)
        nsteps = max(1, int(np.ceil(seg.duration / cfg.step - 1e-9)))
        dt = seg.duration / nsteps
        amps, freqs = _segment_drives(seg, n, cfg.params)
        chunks = _chunks(nsteps, cfg.report_grid)
        log.info("segment %s: %d steps of %.3g on %s", seg.label or seg.drive, nsteps, dt, backend)
        for k in chunks:
            Z = rk4_propagate(Z, lam_g, sb.offs, sb.sizes, sb.blocks, amps, freqs, t, dt, k, backend)
            t += k * dt
            steps += k
            if not np.all(np.isfinite(Z)):
                raise SimulationError(f"non-finite state at t = {t:.6g}")
            if cfg.report_grid:
                samples.append({"t": t, "norm_defect": _norm_defect(Z)})
    cols = (sb.W @ Z)[inv]
    return Propagation(n, cols, t, steps, samples)


def _chunks(nsteps: int, grid: int) -> List[int]:
    if grid <= 1:
        return [nsteps]
    edges = np.unique(np.linspace(0, nsteps, grid + 1).round().astype(int))
    return [int(b - a) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _norm_defect(Z) -> float:
    return float(np.abs(np.linalg.norm(Z, axis=0) - 1).max())


# -- extraction ----------------------------------------------------------------------


@dataclass(frozen=True)
class ExtractedGate:
    phi: np.ndarray  # phi-coordinate form
    computational: np.ndarray
    leakage: float
    subspace_nonunitarity: float


def extract_qubit_gate(columns: np.ndarray, n: int, tr: FockTruncation, photon: int = 0) -> ExtractedGate:
    """Restrict to the photon-ground (or ``photon``) embedded block.

    ``columns`` may be a full square propagator or just the embedded columns.
    """
    columns = np.asarray(columns)
    idx = embedded_indices(n, tr, photon)
    if columns.shape[0] != 2 ** n * tr.dim:
        raise ValueError("propagator rows do not match the truncated space")
    if columns.shape[1] == columns.shape[0]:
        columns = columns[:, idx]
    elif columns.shape[1] != idx.size:
        raise ValueError("expected the full propagator or the 2^n embedded columns")
    Gc = columns[idx]
    T = G.basis_change(n).matrix
    Gphi = T.T @ Gc @ T
    d = 2 ** n
    leak = float(max(0.0, 1.0 - np.linalg.norm(Gc) ** 2 / d))
    nonu = float(np.abs(Gc.conj().T @ Gc - np.eye(d)).max())
    return ExtractedGate(Gphi, Gc, leak, nonu)


def dominant_transition(Gphi: np.ndarray):
    """The two phi states losing the most population, as a sorted 0-based pair."""
    loss = 1.0 - np.abs(np.diag(Gphi)) ** 2
    i, j = np.argsort(loss)[::-1][:2]
    return tuple(sorted((int(i), int(j))))


# -- reports -------------------------------------------------------------------------


@dataclass
class GateReport:
    target: str
    achieved: np.ndarray  # phi-coordinate form for single pulses, computational for composites
    target_matrix: np.ndarray
    fidelity: float
    leakage: float
    subspace_nonunitarity: float
    gate_time: float
    params: dict
    diagnostics: dict = field(default_factory=dict)
    timing: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        d = {
            "schema": SCHEMA,
            "target": self.target,
            "fidelity": self.fidelity,
            "leakage": self.leakage,
            "subspace_nonunitarity": self.subspace_nonunitarity,
            "gate_time": self.gate_time,
            "achieved": _cplx(self.achieved),
            "params": self.params,
            "diagnostics": self.diagnostics,
        }
        if include_timing:
            d["timing"] = self.timing
        return d


def _cplx(M) -> dict:
    M = np.asarray(M)
    return {"re": M.real.tolist(), "im": M.imag.tolist()}


def target_matrix(gate: str) -> np.ndarray:
    """Ideal result of a designed schedule, in the same coordinates as GateReport.achieved."""
    if gate == "CZ2":
        return G.u_t0_quarter()
    if gate in ("A", "B", "C"):
        return G.u_half(gate)
    if gate == "CNOT2":
        return G.CNOT.copy()
    if gate == "CCNOT":
        return G.ccnot_direct()
    raise ValueError(f"unknown gate {gate!r}")


def _config_for(cfg: SimulationConfig, schedule: PulseSchedule) -> SimulationConfig:
    p = schedule.params
    return replace(cfg, params=ModelParams(p.omega, p.delta, p.g))


def _pulse(cfg: SimulationConfig, seg: Segment, n: int):
    prop = integrate(cfg, [seg], n)
    ex = extract_qubit_gate(prop.columns, n, cfg.tr, cfg.photon_init)
    diag = {
        "label": seg.label,
        "duration": seg.duration,
        "steps": prop.steps,
        "isometry_defect": prop.isometry_defect,
        "leakage": ex.leakage,
        "subspace_nonunitarity": ex.subspace_nonunitarity,
        "dominant_transition": list(dominant_transition(ex.phi)),
    }
    if seg.label in G.PAIRS:
        diag["rwa_transition"] = list(G.PAIRS[seg.label])
        diag["fidelity"] = G.fidelity(target_matrix(seg.label), ex.phi)
    if prop.samples:
        diag["samples"] = prop.samples
    return ex, diag


def simulate(schedule: PulseSchedule, cfg: Optional[SimulationConfig] = None) -> GateReport:
    """Run a designed schedule and compare with its ideal gate."""
    cfg = _config_for(cfg or SimulationConfig(), schedule)
    t0 = time.perf_counter()
    n = schedule.n_atoms
    results = [_pulse(cfg, seg, n) for seg in schedule.segments]
    diags = {"segments": [d for _, d in results], "backend": cfg.backend or backend_name()}
    target = schedule.target
    if target in ("CZ2", "A", "B", "C"):
        ex = results[0][0]
        achieved = ex.phi
        leak, nonu = ex.leakage, ex.subspace_nonunitarity
    else:
        achieved = compose(target, [ex.phi for ex, _ in results])
        leak = float(1.0 - np.prod([1.0 - ex.leakage for ex, _ in results]))
        nonu = float(max(ex.subspace_nonunitarity for ex, _ in results))
    diags["isometry_defect"] = max(d["isometry_defect"] for _, d in results)
    tm = target_matrix(target)
    return GateReport(
        target=target,
        achieved=achieved,
        target_matrix=tm,
        fidelity=G.fidelity(tm, achieved),
        leakage=leak,
        subspace_nonunitarity=nonu,
        gate_time=schedule.duration,
        params={**cfg.to_dict(), "h1": schedule.segments[0].h},
        diagnostics=diags,
        timing=time.perf_counter() - t0,
    )


def compose(target: str, pulses: Sequence[np.ndarray]) -> np.ndarray:
    """Insert simulated pulse propagators into the exact frame-gate algebra."""
    if target == "CNOT2":
        return G.assemble_cnot_two(u_t0=pulses[0])["C_NOT"]
    if target == "CCNOT":
        first = G.assemble_three("A", {"A": pulses[0]})["gate"]
        second = G.assemble_three("A", {"A": pulses[1]})["gate"]
        cv13 = G.controlled(G.V_HALF, 1, 3, 3)
        cv23 = G.controlled(G.V_HALF, 2, 3, 3)
        cvd23 = G.controlled(G.V_HALF.conj().T, 2, 3, 3)
        return second @ cvd23 @ first @ cv23 @ cv13
    raise ValueError(f"no composition rule for {target!r}")


# -- sweeps ----------------------------------------------------------------------------


def _sweep_one(args):
    gate, h, cfg, g, omega = args
    rep = simulate(design(gate, h1=h, g=g, omega=omega), cfg)
    return rep


def fidelity_sweep(gate: str, h_list: Sequence[float], cfg: Optional[SimulationConfig] = None,
                   workers: int = 1) -> List[dict]:
    """Rows (h_over_g, fidelity, leakage, gate_time), in the order of ``h_list``."""
    if len(h_list) == 0:
        raise ValueError("h_list must be nonempty")
    if gate not in N_ATOMS:
        raise ValueError(f"unknown gate {gate!r}")
    cfg = cfg or SimulationConfig()
    p = cfg.params
    jobs = [(gate, float(h) * p.g, cfg, p.g, p.omega) for h in h_list]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            reports = list(ex.map(_sweep_one, jobs))
    else:
        reports = [_sweep_one(j) for j in jobs]
    rows = []
    for h, rep in zip(h_list, reports):
        rows.append({
            "h_over_g": float(h),
            "fidelity": rep.fidelity,
            "leakage": rep.leakage,
            "gate_time": rep.gate_time,
            "report": rep,
        })
    return rows


def strictly_improving(rows: Sequence[dict]) -> bool:
    """Fidelity strictly increases as h_over_g decreases."""
    ordered = sorted(rows, key=lambda r: -r["h_over_g"])
    f = [r["fidelity"] for r in ordered]
    return all(b > a for a, b in zip(f, f[1:]))


# -- independent references ------------------------------------------------------------


def rotating_frame_oracle(n: int, seg: Segment, params: ModelParams, tr: FockTruncation) -> np.ndarray:
    """Exact U_0(t) columns for one constant drive.

    With a single drive frequency the Hamiltonian is static in the frame rotating
    with (omega + Omega) K, so U_0 = e^{itgA} e^{it(omega+Omega)K} e^{-itH'}.
    """
    from scipy.linalg import eigh

    from .operators import excitation_operator

    A = coupling_operator(n, tr).data.real
    K = np.diag(excitation_operator(n, tr).data).real
    sp = np.kron(pauli_embed("+", seg.drive, n).data, np.eye(tr.dim))
    wf = params.omega + seg.omega
    c = seg.h * np.exp(1j * seg.phi)
    Hp = wf * np.diag(K) + params.g * A + c * sp + np.conj(c) * sp.T
    t = seg.duration
    idx = embedded_indices(n, tr)
    w, v = eigh(Hp)
    cols = (v * np.exp(-1j * t * w)) @ v.conj().T[:, idx]
    cols = np.exp(1j * t * wf * K)[:, None] * cols
    wa, va = eigh(A)
    return (va * np.exp(1j * t * params.g * wa)) @ (va.T @ cols)


def lab_frame_reference(n: int, seg: Segment, params: ModelParams, tr: FockTruncation,
                        rtol: float = 1e-11, atol: float = 1e-12) -> np.ndarray:
    """U_0 columns from direct integration of the lab-frame equation, then the frame change."""
    from scipy.integrate import solve_ivp

    from .interaction import build_hamiltonian
    from .operators import excitation_operator
    from .spin import expm_full

    p = params.with_drives([
        (seg.h, seg.omega, seg.phi) if j == seg.drive - 1 else (0.0, 0.0, 0.0) for j in range(n)
    ])
    H = build_hamiltonian(n, p, tr)
    idx = embedded_indices(n, tr)
    d = H.static.shape[0]
    y0 = np.zeros((d, idx.size), dtype=complex)
    y0[idx, np.arange(idx.size)] = 1.0

    def rhs(t, y):
        return (-1j * (H(t) @ y.reshape(d, -1))).ravel()

    sol = solve_ivp(rhs, (0.0, seg.duration), y0.ravel(), method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise SimulationError(sol.message)
    Ulab = sol.y[:, -1].reshape(d, -1)
    t = seg.duration
    K = np.diag(excitation_operator(n, tr).data).real
    E = expm_full(n, t, params.g, tr).data  # e^{-itgA}
    return E.conj().T @ (np.exp(1j * t * params.omega * K)[:, None] * Ulab)
