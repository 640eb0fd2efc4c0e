import json

import numpy as np
import pytest

from tcq import gates as G
from tcq.interaction import ModelParams
from tcq.operators import FockTruncation, oracle_expm
from tcq.pulses import Segment, design
from tcq.simulator import (
    SimulationConfig,
    SimulationError,
    compose,
    dominant_transition,
    embedded_indices,
    extract_qubit_gate,
    fidelity_sweep,
    integrate,
    lab_frame_reference,
    rotating_frame_oracle,
    sector_basis,
    simulate,
    strictly_improving,
)

TR = FockTruncation(10, 3)
PARAMS = ModelParams()


def _short(gate, h, duration):
    s = design(gate, h1=h).segments[0]
    return Segment(s.drive, s.omega, s.phi, s.h, duration, s.label)


def test_sector_basis_diagonalizes_coupling():
    from tcq.operators import coupling_operator

    sb = sector_basis(3, TR)
    A = coupling_operator(3, TR).data.real[np.ix_(sb.perm, sb.perm)]
    D = sb.W.T @ A @ sb.W
    np.testing.assert_allclose(D, np.diag(sb.lam), atol=1e-13)


def test_zero_drive_gives_identity():
    seg = Segment(1, 2.0, 0.0, 0.0, 25.0)
    prop = integrate(SimulationConfig(tr=TR), [seg], 3)
    ex = extract_qubit_gate(prop.columns, 3, TR)
    np.testing.assert_allclose(ex.computational, np.eye(8), atol=1e-13)
    assert ex.leakage < 1e-13


@pytest.mark.parametrize("backend", ["numba", "numpy"])
@pytest.mark.parametrize("gate,n", [("CZ2", 2), ("B", 3)])
def test_matches_rotating_frame_oracle(backend, gate, n):
    seg = _short(gate, 0.1, 15.0)
    prop = integrate(SimulationConfig(tr=TR, backend=backend), [seg], n)
    ref = rotating_frame_oracle(n, seg, PARAMS, TR)
    assert np.abs(prop.columns - ref).max() < 1e-10
    assert prop.isometry_defect < 1e-12


def test_fourth_order_convergence():
    seg = _short("CZ2", 0.5, 10.0)
    ref = rotating_frame_oracle(2, seg, PARAMS, TR)
    errs = []
    for step in (0.1, 0.05):
        cols = integrate(SimulationConfig(tr=TR, step=step), [seg], 2).columns
        errs.append(np.abs(cols - ref).max())
    assert 12 < errs[0] / errs[1] < 20


def test_interaction_picture_consistency_with_lab_frame():
    seg = _short("A", 0.2, 2.0)
    cfg = SimulationConfig(tr=FockTruncation(8, 3))
    cols = integrate(cfg, [seg], 3).columns
    lab = lab_frame_reference(3, seg, PARAMS, cfg.tr)
    assert np.abs(cols - lab).max() < 1e-6


def test_drive_switched_off_mid_schedule():
    on = _short("CZ2", 0.2, 12.0)
    off = Segment(1, on.omega, 0.0, 0.0, 30.0)
    cfg = SimulationConfig(tr=TR)
    both = integrate(cfg, [on, off], 2).columns
    ref = rotating_frame_oracle(2, on, PARAMS, TR)
    # F vanishes once the drive is off, so the remaining factor is exp(0) = I
    ref = oracle_expm(np.zeros((ref.shape[0],) * 2)) @ ref
    assert np.abs(both - ref).max() < 1e-8


def test_guards():
    seg = _short("CZ2", 0.5, 1.0)
    with pytest.raises(SimulationError):
        integrate(SimulationConfig(tr=TR, step=0.5), [seg], 2)
    bad = np.full((2 ** 2 * TR.dim, 4), np.nan, dtype=complex)
    with pytest.raises(SimulationError):
        integrate(SimulationConfig(tr=TR), [seg], 2, start=bad)
    with pytest.raises(ValueError):
        SimulationConfig(step=0.0)
    with pytest.raises(ValueError):
        SimulationConfig(tr=TR, photon_init=TR.n_max)
    with pytest.raises(ValueError):
        integrate(SimulationConfig(ModelParams(1.0, 2.0), TR), [seg], 2)


def test_extract_accepts_full_propagator():
    U = np.eye(4 * TR.dim)
    ex = extract_qubit_gate(U, 2, TR)
    np.testing.assert_allclose(ex.phi, np.eye(4), atol=1e-15)
    assert ex.leakage == 0 and ex.subspace_nonunitarity < 1e-15
    with pytest.raises(ValueError):
        extract_qubit_gate(np.eye(5), 2, TR)


def test_leakage_counts_lost_norm():
    cols = np.zeros((4 * TR.dim, 4), dtype=complex)
    idx = embedded_indices(2, TR)
    cols[idx, np.arange(4)] = np.sqrt(0.75)
    cols[idx + 1, np.arange(4)] = 0.5
    assert extract_qubit_gate(cols, 2, TR).leakage == pytest.approx(0.25)


def test_dominant_transition():
    U = G.rwa_propagator("A", 30.0, 0.02, 0.0).matrix
    assert dominant_transition(U) == (4, 5)


def test_compose_with_ideal_pulses_is_exact():
    np.testing.assert_array_equal(compose("CNOT2", [G.u_t0_quarter()]), G.CNOT)
    M = compose("CCNOT", [G.u_half("A")] * 2)
    assert np.abs(M - G.ccnot_direct()).max() < 1e-15
    with pytest.raises(ValueError):
        compose("CZ2", [])


def test_simulate_report_and_sweep():
    cfg = SimulationConfig(tr=FockTruncation(8, 2), step=2e-3)
    rows = fidelity_sweep("CZ2", [0.4, 0.3], cfg)
    assert [r["h_over_g"] for r in rows] == [0.4, 0.3]
    for r in rows:
        rep = r["report"]
        assert 0 <= rep.fidelity <= 1 + 1e-12 and rep.leakage >= 0
        ref = rotating_frame_oracle(2, design("CZ2", h1=r["h_over_g"]).segments[0], PARAMS, cfg.tr)
        want = G.fidelity(G.u_t0_quarter(), extract_qubit_gate(ref, 2, cfg.tr).phi)
        assert rep.fidelity == pytest.approx(want, abs=1e-8)
        json.dumps(rep.to_dict())
    assert r["gate_time"] == pytest.approx(rows[0]["gate_time"] * 4 / 3)
    with pytest.raises(ValueError):
        fidelity_sweep("CZ2", [], cfg)


def test_composite_simulation_uses_exact_frames():
    cfg = SimulationConfig(tr=FockTruncation(8, 2), step=2e-3)
    sched = design("CNOT2", h1=0.4)
    rep = simulate(sched, cfg)
    single = simulate(design("CZ2", h1=0.4), cfg)
    np.testing.assert_allclose(rep.achieved, G.assemble_cnot_two(single.achieved)["C_NOT"], atol=1e-12)
    assert len(rep.diagnostics["segments"]) == 1


def test_strictly_improving():
    rows = [{"h_over_g": 0.1, "fidelity": 0.3}, {"h_over_g": 0.01, "fidelity": 0.5}, {"h_over_g": 0.03, "fidelity": 0.4}]
    assert strictly_improving(rows)
    rows[1]["fidelity"] = 0.4
    assert not strictly_improving(rows)
