"""Exact qubit-gate algebra: RWA propagators, frame changes and CNOT/CCNOT circuits.

Qubit ordering follows the atoms (atom 1 = leftmost tensor factor). A control
is active on basis index 1 of its qubit, so C_NOT = diag(1, 1) + sigma_1 on
the lower block.

The frame gates (swap, sigma_1, W on single atoms) are multiplied directly
with the RWA propagators, which are written in the phi coordinates. This
mirrors the reference construction literally; see ``phi_to_computational``
for the basis change itself.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .spin import T_THREE, T_TWO

I2 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
W = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
V_HALF = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]])  # V^2 = sigma_1
# four-qubit circuit: the matrix as usually quoted, which is not unitary ...
V_QUARTER_QUOTED = 0.25 * np.array([[3 + 1j, 1 - 1j], [1 - 1j, 3 + 1j]])
# ... and the unitary fourth root of sigma_1 (eigenvalues 1 and e^{i pi/4})
_E8 = np.exp(0.25j * np.pi)
V_QUARTER = 0.5 * np.array([[1 + _E8, 1 - _E8], [1 - _E8, 1 + _E8]])


@dataclass(frozen=True)
class QubitGate:
    matrix: np.ndarray
    label: str = ""

    @property
    def n_qubits(self) -> int:
        return int(round(np.log2(self.matrix.shape[0])))

    def unitarity_defect(self) -> float:
        M = self.matrix
        return float(np.abs(M.conj().T @ M - np.eye(M.shape[0])).max())

    def __matmul__(self, other: "QubitGate") -> "QubitGate":
        return QubitGate(self.matrix @ other.matrix, f"{self.label}*{other.label}")


def kron(*ops) -> np.ndarray:
    return reduce(np.kron, ops)


def on_qubit(op: np.ndarray, j: int, n: int) -> np.ndarray:
    """Single-qubit ``op`` on qubit j (1-based) of n."""
    return kron(*[op if k == j else I2 for k in range(1, n + 1)])


def controlled(op: np.ndarray, control: int, target: int, n: int) -> np.ndarray:
    """|0><0|_c (x) 1 + |1><1|_c (x) op_t."""
    if control == target:
        raise ValueError("control and target must differ")
    P0 = np.diag([1.0, 0.0]).astype(complex)
    P1 = np.diag([0.0, 1.0]).astype(complex)
    idle = [P0 if k == control else I2 for k in range(1, n + 1)]
    act = [P1 if k == control else (op if k == target else I2) for k in range(1, n + 1)]
    return kron(*idle) + kron(*act)


def fidelity(target: np.ndarray, achieved: np.ndarray) -> float:
    """Phase-insensitive |Tr(U_target^dagger U)| / dim."""
    return float(abs(np.trace(target.conj().T @ achieved)) / target.shape[0])


def phi_to_computational(G_phi: np.ndarray) -> np.ndarray:
    """T G T^dagger, the gate on qubit amplitudes given its phi-coordinate form."""
    T = basis_change(int(round(np.log2(G_phi.shape[0])))).matrix
    return T @ G_phi @ T.T


_QUARTER_TURNS = (1.0, 1j, -1.0, -1j)


def cis(angle: float) -> complex:
    """e^{i angle}, exact when angle is a multiple of pi/2 to within rounding."""
    q = angle / (np.pi / 2)
    k = round(q)
    if abs(q - k) <= 1e-12 * max(1.0, abs(q)):
        return _QUARTER_TURNS[k % 4]
    return complex(np.exp(1j * angle))


def hadamard_conjugate(X: np.ndarray, j: int) -> np.ndarray:
    """(W on qubit j) X (W on qubit j), with the two 1/sqrt2 factors combined into 1/2."""
    n = int(round(np.log2(X.shape[0])))
    H = on_qubit(np.array([[1, 1], [1, -1]], dtype=complex), j, n)
    return 0.5 * (H @ X @ H)


# -- RWA propagators ----------------------------------------------------------


def _two_level(dim, i, j, angle, phi) -> np.ndarray:
    U = np.eye(dim, dtype=complex)
    z = cis(angle)
    c, s = z.real, z.imag
    U[i, i] = c
    U[j, j] = c
    U[i, j] = 1j * cis(phi) * s
    U[j, i] = 1j * cis(-phi) * s
    return U


# 0-based (row, col) of the driven pair in the phi coordinates
PAIRS = {"CZ2": (1, 2), "A": (4, 5), "B": (2, 6), "C": (5, 6)}


def rwa_propagator(gate: str, t: float, rate: float, phi1: float) -> QubitGate:
    """exp(i t rate (e^{i phi} |i><j| + h.c.)) on the driven phi pair."""
    i, j = PAIRS[gate]
    dim = 4 if gate == "CZ2" else 8
    return QubitGate(_two_level(dim, i, j, rate * t, phi1), f"U_{gate}")


def rwa_propagator_two(t: float, alpha: float, phi1: float) -> QubitGate:
    return rwa_propagator("CZ2", t, alpha, phi1)


def basis_change(n: int = 2) -> QubitGate:
    if n == 2:
        return QubitGate(T_TWO.astype(complex), "T")
    if n == 3:
        return QubitGate(T_THREE.astype(complex), "T")
    raise ValueError("basis change defined for 2 or 3 qubits")


# -- two qubits -----------------------------------------------------------------


def u_t0_quarter() -> np.ndarray:
    """RWA propagator at alpha t0 = pi/2 with e^{i phi1} = i."""
    return rwa_propagator_two(np.pi / 2, 1.0, np.pi / 2).matrix


def assemble_cnot_two(u_t0=None) -> dict:
    """C_NOT = (1 (x) W) (1 (x) sigma_1) P U(t0) (1 (x) sigma_1) (1 (x) W).

    Returns the intermediate products as well, keyed by name.
    """
    U = u_t0_quarter() if u_t0 is None else np.asarray(u_t0)
    X2 = kron(I2, SIGMA1)
    pu = SWAP @ U
    czs = X2 @ pu @ X2
    cnot = hadamard_conjugate(czs, 2)
    return {"U_t0": U, "PU": pu, "C_sigma_z": czs, "C_NOT": cnot}


def sigma3_sigma3() -> np.ndarray:
    """RWA propagator with cos(alpha t0) = -1, equal to sigma_3 (x) sigma_3."""
    return rwa_propagator_two(np.pi, 1.0, 0.0).matrix


# -- three qubits ---------------------------------------------------------------


def u_half(gate: str) -> np.ndarray:
    """RWA propagator after a half period (cos = -1); phase independent."""
    return rwa_propagator(gate, np.pi, 1.0, 0.0).matrix


def frame_tilde_a(U_A) -> np.ndarray:
    X = on_qubit(SIGMA1, 2, 3)
    return X @ U_A @ X


def assemble_three(variant: str, pulses=None) -> dict:
    """Exact 8x8 CNOT variants from the half-period propagators.

    ``pulses`` may supply replacements for the propagators, e.g. simulated
    ones, keyed by "A", "B", "C".
    """
    pulses = pulses or {}
    U = {k: np.asarray(pulses.get(k, u_half(k))) for k in ("A", "B", "C")}
    if variant == "A":
        tilde = frame_tilde_a(U["A"])
        return {"U": U["A"], "tilde": tilde, "gate": hadamard_conjugate(tilde, 2)}
    if variant == "B":
        X = on_qubit(SIGMA1, 3, 3)
        tilde = X @ U["B"] @ X
        return {"U": U["B"], "tilde": tilde, "gate": hadamard_conjugate(tilde, 3)}
    if variant == "C":
        tilde = frame_tilde_a(U["A"]) @ U["C"]
        return {"U": U["C"], "tilde": tilde, "gate": hadamard_conjugate(tilde, 3)}
    raise ValueError(f"unknown variant {variant!r}")


CNOT_12 = kron(CNOT, I2)  # type A: control 1, target 2
CNOT_23 = kron(I2, CNOT)  # type B: control 2, target 3
CNOT_13 = controlled(SIGMA1, 1, 3, 3)  # type C


def cnot13_four_step(a=None, b=None) -> np.ndarray:
    """Control 1 -> target 3 from alternating type A and type B gates."""
    a = CNOT_12 if a is None else a
    b = CNOT_23 if b is None else b
    return b @ a @ b @ a


def ccnot_circuit(cnot_xy=None, v=V_HALF) -> np.ndarray:
    """Five-gate controlled-controlled-NOT; gates listed right to left in time."""
    cnot_xy = CNOT_12 if cnot_xy is None else cnot_xy
    cv_xz = controlled(v, 1, 3, 3)
    cv_yz = controlled(v, 2, 3, 3)
    cvd_yz = controlled(v.conj().T, 2, 3, 3)
    return cnot_xy @ cvd_yz @ cnot_xy @ cv_yz @ cv_xz


def assemble_ccnot() -> QubitGate:
    return QubitGate(ccnot_circuit(), "CC_NOT")


def ccnot_direct() -> np.ndarray:
    M = np.eye(8, dtype=complex)
    M[6:, 6:] = SIGMA1
    return M


# (control, target, op) in time order for the four-qubit circuit. As usually
# drawn, the 8th and 10th gates take their controls from qubits 2 and 1; the
# V exponents then do not add up to 4 x1 x2 x3. The Gray-code order swaps them.
CCCNOT_SEQUENCE_DRAWN = (
    (1, 4, "V"), (1, 2, "X"), (2, 4, "Vd"), (1, 2, "X"), (2, 4, "V"),
    (2, 3, "X"), (3, 4, "Vd"), (2, 3, "X"), (3, 4, "V"),
    (1, 3, "X"), (3, 4, "Vd"), (1, 3, "X"), (3, 4, "V"),
)
CCCNOT_SEQUENCE = (
    (1, 4, "V"), (1, 2, "X"), (2, 4, "Vd"), (1, 2, "X"), (2, 4, "V"),
    (2, 3, "X"), (3, 4, "Vd"), (1, 3, "X"), (3, 4, "V"),
    (2, 3, "X"), (3, 4, "Vd"), (1, 3, "X"), (3, 4, "V"),
)


def compose_sequence(sequence, v, n: int = 4) -> np.ndarray:
    ops = {"V": v, "Vd": v.conj().T, "X": SIGMA1}
    U = np.eye(2 ** n, dtype=complex)
    for c, t, name in sequence:
        U = controlled(ops[name], c, t, n) @ U
    return U


def cccnot_direct() -> np.ndarray:
    M = np.eye(16, dtype=complex)
    M[14:, 14:] = SIGMA1
    return M


def cccnot_identity_check(sequence=CCCNOT_SEQUENCE, v=V_QUARTER) -> QubitGate:
    return QubitGate(compose_sequence(sequence, v), "CCC_NOT")


# -- single qubit pulses --------------------------------------------------------


def appendix_single_qubit(theta: float, h: float, t: float) -> QubitGate:
    """exp(-i t [[theta/2, h], [h, -theta/2]]) in closed form."""
    w = np.sqrt(theta * theta / 4 + h * h)
    c = np.cos(t * w)
    s = np.sin(t * w) / w if w > 0 else t
    x11 = c - 1j * (theta / 2) * s
    x12 = -1j * h * s
    x22 = c + 1j * (theta / 2) * s
    return QubitGate(np.array([[x11, x12], [x12, x22]]), "R")


def free_evolution(delta: float, t: float) -> np.ndarray:
    """V_0(t) = diag(1, e^{-i delta t}), overall phase dropped."""
    return np.diag([1.0, cis(-delta * t)])


def resonant_pulse(delta: float, h: float, t: float, phi: float) -> np.ndarray:
    """V(t) on resonance (Omega = delta), overall phase dropped."""
    R = appendix_single_qubit(0.0, h, t).matrix
    return np.diag([1.0, cis(-(delta * t + phi))]) @ R


def appendix_walsh_hadamard_sequence(delta: float = 1.0, h: float = 0.01) -> dict:
    """Free evolution over 3 pi / (2 delta), a resonant pi/4 pulse, free evolution again."""
    if not (delta > 0 and h > 0):
        raise ValueError("delta and h must be positive")
    t1 = 3 * np.pi / (2 * delta)
    tau = np.pi / (4 * h)
    # phase chosen so that e^{-i (delta tau + phi)} = 1
    phi = -np.remainder(delta * tau, 2 * np.pi)
    V0 = free_evolution(delta, t1)
    V = resonant_pulse(delta, h, tau, phi)
    return {"V0": V0, "V": V, "phi": phi, "times": (t1, t1 + tau, 2 * t1 + tau), "product": V0 @ V @ V0}


def appendix_walsh_hadamard(delta: float = 1.0, h: float = 0.01) -> QubitGate:
    return QubitGate(appendix_walsh_hadamard_sequence(delta, h)["product"], "W")
