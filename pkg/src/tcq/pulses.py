"""Drive frequencies, phases and durations for the resonant gate primitives."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .interaction import RESONANCES, Drive, ModelParams, ResonanceCondition

SCHEMA = "tcq/1"

_R2, _R3, _R6 = np.sqrt(2.0), np.sqrt(3.0), np.sqrt(6.0)
_R73 = np.sqrt(73.0)

# Rabi rate per unit drive amplitude h_1
_RATE = {
    "CZ2": (_R6 - _R2) / 24,
    "A": _R3 * (11 - _R73) / (20 * _R73),
    "B": _R2 * (-1 + _R3) / 12,
    "C": (-4 + np.sqrt(30.0)) / 60,
}
FLAVOR = {"CZ2": "quarter", "A": "half", "B": "half", "C": "half"}
N_ATOMS = {"CZ2": 2, "CNOT2": 2, "A": 3, "B": 3, "C": 3, "CCNOT": 3}
GATES = tuple(N_ATOMS)


def rabi_rate(gate: str, h1: float, g: float = 1.0) -> float:
    """Rabi rate of the secular 2x2 block; independent of g."""
    if gate not in _RATE:
        raise ValueError(f"no Rabi rate for gate {gate!r}")
    if not h1 > 0:
        raise ValueError("h1 must be positive")
    return _RATE[gate] * h1


def gate_time(gate: str, h1: float, flavor: Optional[str] = None) -> float:
    """Smallest positive time with cos(rate t) = 0 (quarter) or -1 (half)."""
    flavor = flavor or FLAVOR[gate]
    r = rabi_rate(gate, h1)
    if flavor == "quarter":
        return np.pi / (2 * r)
    if flavor == "half":
        return np.pi / r
    raise ValueError(f"flavor must be 'quarter' or 'half', got {flavor!r}")


def phase_rule(gate: str) -> float:
    """e^{i phi} = i for the two-atom quarter pulse; 0 for half pulses (phase drops out)."""
    if gate == "CZ2":
        return np.pi / 2
    if gate in ("A", "B", "C"):
        return 0.0
    raise ValueError(f"no phase rule for gate {gate!r}")


def kappa_gaps() -> float:
    """Smallest pairwise distance between the resonance coefficients."""
    ks = sorted(r.kappa for r in RESONANCES.values())
    return float(min(b - a for a, b in zip(ks, ks[1:])))


@dataclass(frozen=True)
class Segment:
    drive: int  # atom index, 1-based
    omega: float  # drive frequency Omega_j
    phi: float
    h: float
    duration: float
    label: str = ""

    def to_dict(self) -> dict:
        return {"drive": self.drive, "omega": self.omega, "phi": self.phi, "h": self.h,
                "duration": self.duration, "label": self.label}

    @classmethod
    def from_dict(cls, d: dict) -> "Segment":
        return cls(int(d["drive"]), float(d["omega"]), float(d["phi"]), float(d["h"]),
                   float(d["duration"]), str(d.get("label", "")))


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered drive segments plus, for composite gates, the ideal frame gates between them.

    ``circuit`` lists steps in time order: ("pulse", segment index) or
    ("frame", gate name).
    """

    target: str
    n_atoms: int
    segments: Tuple[Segment, ...]
    params: ModelParams
    circuit: Tuple[Tuple[str, object], ...] = field(default=())

    def __post_init__(self):
        for s in self.segments:
            if not s.duration > 0:
                raise ValueError("segment durations must be positive")
            if not 1 <= s.drive <= self.n_atoms:
                raise ValueError(f"drive index {s.drive} out of range for {self.n_atoms} atoms")

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    def to_dict(self) -> dict:
        d = {
            "schema": SCHEMA,
            "target": self.target,
            "n_atoms": self.n_atoms,
            "segments": [s.to_dict() for s in self.segments],
            "params": self.params.to_dict(),
        }
        if self.circuit:
            d["circuit"] = [list(step) for step in self.circuit]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "PulseSchedule":
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported schedule schema {d.get('schema')!r}")
        target = d["target"]
        n_atoms = int(d.get("n_atoms", N_ATOMS.get(target, 0)))
        segments = tuple(Segment.from_dict(s) for s in d["segments"])
        params = ModelParams.from_dict(d["params"])
        circuit = tuple((str(k), v if k == "frame" else int(v)) for k, v in d.get("circuit", []))
        return cls(target, n_atoms, segments, params, circuit)

    @classmethod
    def from_json(cls, text: str) -> "PulseSchedule":
        return cls.from_dict(json.loads(text))


def resonance(gate: str) -> ResonanceCondition:
    if gate not in RESONANCES:
        raise ValueError(f"no resonance condition for gate {gate!r}")
    return RESONANCES[gate]


def _segment(gate: str, h1: float, params: ModelParams) -> Segment:
    res = resonance(gate)
    return Segment(
        drive=res.drive,
        omega=res.omega_drive(params.g, params.omega),
        phi=phase_rule(gate),
        h=h1,
        duration=gate_time(gate, h1),
        label=gate,
    )


def segment_params(params: ModelParams, seg: Segment, n_atoms: int) -> ModelParams:
    """Model parameters with only the segment's drive switched on."""
    drives = [Drive() for _ in range(n_atoms)]
    drives[seg.drive - 1] = Drive(seg.h, seg.omega, seg.phi)
    return params.with_drives(drives)


def design(gate: str, h1: float = 0.01, g: float = 1.0, omega: float = 1.0,
           delta: Optional[float] = None) -> PulseSchedule:
    """Schedule realizing ``gate``.

    Composite gates interleave the physical segments with ideal frame gates,
    multiplied in the same order as the exact gate algebra.
    """
    if gate not in N_ATOMS:
        raise ValueError(f"unknown gate {gate!r}; choose from {', '.join(GATES)}")
    params = ModelParams(omega=omega, delta=omega if delta is None else delta, g=g)
    n = N_ATOMS[gate]
    if gate in ("CZ2", "A", "B", "C"):
        return PulseSchedule(gate, n, (_segment(gate, h1, params),), params, (("pulse", 0),))
    if gate == "CNOT2":
        circuit = (
            ("frame", "1xW"), ("frame", "1xX"), ("pulse", 0), ("frame", "P"),
            ("frame", "1xX"), ("frame", "1xW"),
        )
        return PulseSchedule(gate, n, (_segment("CZ2", h1, params),), params, circuit)
    # CCNOT: the two CNOT(1 -> 2) steps are type A pulses; controlled-V steps are ideal
    seg = _segment("A", h1, params)
    a_cnot = (("frame", "1xWx1"), ("frame", "1xXx1"), ("pulse", None), ("frame", "1xXx1"), ("frame", "1xWx1"))
    first = tuple(("pulse", 0) if k == "pulse" else (k, v) for k, v in a_cnot)
    second = tuple(("pulse", 1) if k == "pulse" else (k, v) for k, v in a_cnot)
    circuit = (("frame", "CV13"), ("frame", "CV23")) + first + (("frame", "CVd23"),) + second
    return PulseSchedule(gate, n, (seg, seg), params, circuit)


def schedule_rate_times(schedule: PulseSchedule):
    """rate * duration for every physical segment."""
    out = []
    for s in schedule.segments:
        out.append(rabi_rate(s.label, s.h) * s.duration)
    return out
