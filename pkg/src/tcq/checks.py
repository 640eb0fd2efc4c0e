"""Oracle-equivalence suites shared by the command line and the test suite.

Every check returns a ``Check`` holding the measured deviation and the
threshold it is held to; nothing here loosens a threshold after the fact.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable, Dict, List

import numpy as np

from . import gates as G
from .interaction import (
    RESONANCES,
    Drive,
    ModelParams,
    reduced_generator,
    reduced_numeric,
    rwa_filter,
)
from .operators import FockTruncation, coupling_operator, oracle_expm
from .pulses import kappa_gaps
from .spin import (
    b_half,
    b_one,
    b_three_half,
    block_mask,
    decomposition,
    expm_spin_half,
    expm_spin_one,
    expm_spin_three_half,
    keylemma_powers,
)

TG_VALUES = (0.3, 1.1, 2.0, 9.2)
DEFAULT_TR = FockTruncation(40, 8)


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    note: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def _lt(name, value, threshold, note="") -> Check:
    value = float(value)
    return Check(name, value, float(threshold), bool(value < threshold), note)


def _le(name, value, threshold, note="") -> Check:
    value = float(value)
    return Check(name, value, float(threshold), bool(value <= threshold), note)


def ulp_deviation(computed, expected):
    """Largest entrywise deviation and the ulp of the largest expected entry."""
    computed, expected = np.asarray(computed), np.asarray(expected)
    dev = float(np.abs(computed - expected).max())
    return dev, float(np.spacing(np.abs(expected).max()))


# -- closed-form exponentials ----------------------------------------------------


_BLOCKS = {
    "spin-1/2": (b_half, expm_spin_half, 2),
    "spin-1": (b_one, expm_spin_one, 3),
    "spin-3/2": (b_three_half, expm_spin_three_half, 4),
}


def check_expm(tr: FockTruncation = DEFAULT_TR, tg_values=TG_VALUES) -> List[Check]:
    out = []
    for name, (gen, closed, levels) in _BLOCKS.items():
        B = gen(tr)
        m = block_mask(levels, tr)
        for tg in tg_values:
            ref = oracle_expm(B, -1j * tg)
            got = closed(tg, 1.0, tr)
            dev = np.abs(got - ref)[np.ix_(m, m)].max()
            out.append(_lt(f"expm {name} tg={tg}", dev, 1e-9))
    return out


def check_keylemma(tr: FockTruncation = DEFAULT_TR, n_max_power: int = 5) -> List[Check]:
    B = b_three_half(tr)
    m = block_mask(4, tr)
    out = []
    P = np.eye(B.shape[0], dtype=complex)
    powers = [P]
    for _ in range(2 * n_max_power + 1):
        P = P @ B
        powers.append(P)
    for n in range(n_max_power + 1):
        even, odd = keylemma_powers(n, tr)
        for label, got, ref in (("even", even, powers[2 * n]), ("odd", odd, powers[2 * n + 1])):
            r = ref[np.ix_(m, m)]
            dev = np.abs(got[np.ix_(m, m)] - r).max() / np.abs(r).max()
            out.append(_lt(f"key lemma B^{2 * n + (label == 'odd')}", dev, 1e-8))
    return out


def check_decomposition(tr: FockTruncation = DEFAULT_TR) -> List[Check]:
    out = []
    for n in (2, 3):
        dec = decomposition(n)
        T = dec.T
        out.append(_lt(f"n={n} T^T T - I", np.abs(T.T @ T - np.eye(2 ** n)).max(), 1e-15))
        TT = dec.full_T(tr)
        X = TT.T @ coupling_operator(n, tr).data @ TT
        inside = np.zeros(X.shape, dtype=bool)
        for _, off, size in dec.blocks:
            lo, hi = off * tr.dim, (off + size) * tr.dim
            inside[lo:hi, lo:hi] = True
        out.append(_lt(f"n={n} off-block of T^T A T", np.abs(X[~inside]).max(), 1e-14))
    return out


def random_params(rng: np.random.Generator, n: int) -> ModelParams:
    drives = [Drive(rng.uniform(0.05, 1.0), rng.uniform(-2, 4), rng.uniform(0, 2 * np.pi)) for _ in range(n)]
    return ModelParams(1.0, 1.0, 1.0, tuple(drives))


def check_reduced(tr: FockTruncation = FockTruncation(20, 6), samples: int = 20, seed: int = 0) -> List[Check]:
    rng = np.random.default_rng(seed)
    out = []
    for n in (2, 3):
        params = random_params(rng, n)
        genr = reduced_generator(n, params)
        worst = 0.0
        for t in rng.uniform(0, 25, samples):
            worst = max(worst, np.abs(genr(t) - reduced_numeric(n, params, tr, t)).max())
        out.append(_lt(f"n={n} reduced generator vs projection", worst, 1e-10))
        out.append(_le(f"n={n} reduced generator hermitian", 0.0 if genr.is_hermitian() else 1.0, 0.0))
    return out


# closed-form secular amplitudes per unit h_1, at phi_1 = 0
_R3, _R73 = np.sqrt(3.0), np.sqrt(73.0)
RWA_AMPLITUDES = {
    "CZ2": -np.sqrt(2.0) * (_R3 - 1) / 24,
    "A": _R3 * (-11 + _R73) / (20 * _R73),
    "B": np.sqrt(2.0) * (1 - _R3) / 12,
    "C": (4 - np.sqrt(30.0)) / 60,
}


def check_rwa(h1: float = 0.01) -> List[Check]:
    out = []
    for gate, res in RESONANCES.items():
        n = 2 if gate == "CZ2" else 3
        params = ModelParams(1.0, 1.0, 1.0, (Drive(h1, res.omega_drive(1.0, 1.0), 0.0),))
        filt = rwa_filter(reduced_generator(n, params), res)
        i, j = G.PAIRS[gate]
        pair = {(i, j), (j, i)}
        out.append(_le(f"{gate} survivors are the pair {(i + 1, j + 1)}",
                       0.0 if set(filt.survivors) == pair else 1.0, 0.0))
        amp = filt.matrix[i, j]
        want = RWA_AMPLITUDES[gate] * h1
        rel = abs(amp - want) / abs(want)
        sym = abs(filt.matrix[j, i] - np.conj(amp)) / abs(want)
        out.append(_lt(f"{gate} secular amplitude", max(rel, sym), 1e-14))
    out.append(_lt("resonance gaps exceed 0.17 g", -kappa_gaps(), -0.17))
    return out


# -- gate algebra ----------------------------------------------------------------


def gate_identities() -> Dict[str, tuple]:
    """name -> (computed, reference) for the closed-form gate matrices."""
    c_tilde = np.eye(8, dtype=complex)
    c_tilde[4:6, 4:6] = G.SIGMA1
    c_tilde[6:8, 6:8] = G.SIGMA1
    return {
        "C_NOT": (G.assemble_cnot_two()["C_NOT"], G.CNOT),
        "C_NOT (x) 1": (G.assemble_three("A")["gate"], np.kron(G.CNOT, G.I2)),
        "1 (x) C_NOT": (G.assemble_three("B")["gate"], np.kron(G.I2, G.CNOT)),
        "C~_NOT": (G.assemble_three("C")["gate"], c_tilde),
        "CC_NOT": (G.assemble_ccnot().matrix, G.ccnot_direct()),
        "sigma3 (x) sigma3": (G.sigma3_sigma3(), np.kron(G.SIGMA3, G.SIGMA3)),
        "W": (G.appendix_walsh_hadamard().matrix, G.W),
        "V^2 = sigma1": (G.V_HALF @ G.V_HALF, G.SIGMA1),
        "V^4 = sigma1 (quoted V)": (np.linalg.matrix_power(G.V_QUARTER_QUOTED, 4), G.SIGMA1),
    }


def check_gates() -> List[Check]:
    out = []
    for name, (got, want) in gate_identities().items():
        dev, ulp = ulp_deviation(got, want)
        out.append(_le(name, dev, ulp, "1 ulp of the largest entry"))
    return out


def check_gates_supplementary() -> List[Check]:
    """Cross-checks beyond the reference matrices."""
    out = []
    dev, _ = ulp_deviation(np.linalg.matrix_power(G.V_QUARTER, 4), G.SIGMA1)
    out.append(_lt("V^4 = sigma1 (unitary fourth root)", dev, 1e-14))
    cc = G.cccnot_identity_check()
    out.append(_lt("CCC_NOT, Gray-code wiring, unitary root", np.abs(cc.matrix - G.cccnot_direct()).max(), 1e-14))
    out.append(_lt("C~_NOT from four type A/B steps",
                   np.abs(G.cnot13_four_step() - G.assemble_three("C")["gate"]).max(), 1e-14))
    pu = G.assemble_cnot_two()["PU"]
    out.append(_lt("P U(t0) = diag(1,1,-1,1)", np.abs(pu - np.diag([1, 1, -1, 1])).max(), 1e-15))
    return out


def findings() -> Dict[str, float]:
    """Deviations of commonly quoted identities that do not hold, measured rather than asserted."""
    drawn = G.cccnot_identity_check(G.CCCNOT_SEQUENCE_DRAWN, G.V_QUARTER_QUOTED).matrix
    drawn_good_v = G.cccnot_identity_check(G.CCCNOT_SEQUENCE_DRAWN, G.V_QUARTER).matrix
    pu_comp = G.SWAP @ G.phi_to_computational(G.u_t0_quarter())
    return {
        "quoted V unitarity defect": G.QubitGate(G.V_QUARTER_QUOTED).unitarity_defect(),
        "quoted V: |V^4 - sigma1|": float(np.abs(np.linalg.matrix_power(G.V_QUARTER_QUOTED, 4) - G.SIGMA1).max()),
        "drawn CCC_NOT wiring, quoted V": float(np.abs(drawn - G.cccnot_direct()).max()),
        "drawn CCC_NOT wiring, unitary root": float(np.abs(drawn_good_v - G.cccnot_direct()).max()),
        "P T U(t0) T^T vs diag(1,1,-1,1)": float(np.abs(pu_comp - np.diag([1, 1, -1, 1])).max()),
    }


def check_appendix(draws: int = 1000, seed: int = 0) -> List[Check]:
    out = []
    dev, ulp = ulp_deviation(G.appendix_walsh_hadamard().matrix, G.W)
    out.append(_le("Walsh-Hadamard sequence = W", dev, ulp, "1 ulp of the largest entry"))
    seq = G.appendix_walsh_hadamard_sequence()
    out.append(_le("V0(t1, 0) = diag(1, i)", np.abs(seq["V0"] - np.diag([1, 1j])).max(), 0.0))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for theta, h, t in zip(rng.uniform(-10, 10, draws), rng.uniform(0, 10, draws), rng.uniform(0, 100, draws)):
        worst = max(worst, G.appendix_single_qubit(theta, h, t).unitarity_defect())
    out.append(_lt(f"single-qubit pulse unitary over {draws} draws", worst, 1e-15))
    return out


SCOPES: Dict[str, Callable[[], List[Check]]] = {
    "expm": check_expm,
    "decomposition": check_decomposition,
    "keylemma": check_keylemma,
    "reduced": lambda: check_reduced() + check_rwa(),
    "gates": lambda: check_gates() + check_gates_supplementary(),
    "appendix": check_appendix,
}


def run_scope(scope: str, seed: int = 0) -> List[Check]:
    if scope == "all":
        return [c for s in SCOPES for c in run_scope(s, seed)]
    if scope not in SCOPES:
        raise ValueError(f"unknown scope {scope!r}; choose from {', '.join(SCOPES)} or all")
    if scope == "reduced":
        return check_reduced(seed=seed) + check_rwa()
    if scope == "appendix":
        return check_appendix(seed=seed)
    return SCOPES[scope]()
