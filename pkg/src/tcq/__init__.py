"""Gate design and simulation for atoms coupled to a single cavity mode."""
from .operators import FockTruncation, Operator, oracle_expm
from .interaction import Drive, ModelParams
from .pulses import PulseSchedule, Segment, design
from .simulator import GateReport, SimulationConfig, simulate

__all__ = [
    "Drive",
    "FockTruncation",
    "GateReport",
    "ModelParams",
    "Operator",
    "PulseSchedule",
    "Segment",
    "SimulationConfig",
    "design",
    "oracle_expm",
    "simulate",
]
