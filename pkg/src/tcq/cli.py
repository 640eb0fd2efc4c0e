"""Command-line entry point: verify, design, simulate, sweep.

Exit codes: 0 success, 1 a check or integrator guard failed, 2 bad input.
Every run writes ``manifest.json`` next to its outputs.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import List, Optional

from .checks import SCOPES, findings, run_scope
from .kernels import backend_name
from .operators import FockTruncation
from .pulses import GATES, PulseSchedule, design, resonance
from .simulator import SimulationConfig, SimulationError, fidelity_sweep, simulate, strictly_improving

SCHEMA = "tcq/1"
UNITS = "frequencies and times in units of g (and 1/g)"
log = logging.getLogger("tcq")


class ConfigError(Exception):
    pass


def _version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:  # pragma: no cover
        return "0+unknown"


def _dump(path: Path, data) -> None:
    path.write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")


def _write_manifest(out: Path, command: str, config: dict, outputs: List[str], wall: float, status: int):
    _dump(out / "manifest.json", {
        "schema": SCHEMA,
        "command": command,
        "config": config,
        "units": UNITS,
        "version": _version(),
        "backend": backend_name(),
        "wall_time_s": wall,
        "outputs": sorted(outputs),
        "exit_code": status,
    })


def _truncation(args) -> FockTruncation:
    try:
        return FockTruncation(args.nmax, args.buffer)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def _positive(name):
    def parse(text):
        try:
            v = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}")
        if not v > 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive")
        return v
    return parse


# -- commands -------------------------------------------------------------------------


def cmd_verify(args, out: Path):
    checks = run_scope(args.scope, seed=args.seed)
    failed = [c for c in checks if not c.passed]
    report = {
        "schema": SCHEMA,
        "scope": args.scope,
        "seed": args.seed,
        "checks": [c.to_dict() for c in checks],
        "passed": not failed,
    }
    if args.scope in ("gates", "all"):
        report["findings"] = findings()
    _dump(out / "verify.json", report)
    for c in checks:
        mark = "PASS" if c.passed else "FAIL"
        print(f"{mark}  {c.name}: {c.value:.3e} (threshold {c.threshold:.3e})")
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return (1 if failed else 0), ["verify.json"], {"scope": args.scope, "seed": args.seed}


def cmd_design(args, out: Path):
    try:
        sched = design(args.gate, h1=args.h1, g=args.g, omega=args.omega)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    name = f"schedule_{args.gate}.json"
    (out / name).write_text(sched.to_json() + "\n")
    print(f"{'segment':<8}{'drive':>6}{'kappa':>10}{'Omega_1':>12}{'phi_1':>10}{'h_1':>10}{'duration':>14}")
    for k, s in enumerate(sched.segments):
        kappa = resonance(s.label).kappa
        print(f"{k:<8}{s.drive:>6}{kappa:>10.4f}{s.omega:>12.4f}{s.phi:>10.4f}{s.h:>10.4g}{s.duration:>14.3f}")
    if len(sched.circuit) > 1:
        print("circuit (time order): " + ", ".join(f"{k}:{v}" for k, v in sched.circuit))
    return 0, [name], {"gate": args.gate, "h1": args.h1, "g": args.g, "omega": args.omega}


def _load_schedule(path: str) -> PulseSchedule:
    try:
        return PulseSchedule.from_json(Path(path).read_text())
    except FileNotFoundError as e:
        raise ConfigError(f"cannot read schedule: {e}") from e
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
        raise ConfigError(f"cannot parse schedule {path}: {type(e).__name__}: {e}") from e


def _config(args) -> SimulationConfig:
    try:
        return SimulationConfig(tr=_truncation(args), step=args.step, report_grid=args.grid)
    except ValueError as e:
        raise ConfigError(str(e)) from e


def cmd_simulate(args, out: Path):
    sched = _load_schedule(args.schedule)
    cfg = _config(args)
    rep = simulate(sched, cfg)
    name = f"report_{sched.target}.json"
    _dump(out / name, rep.to_dict())
    print(f"{sched.target}: fidelity {rep.fidelity:.6f}  leakage {rep.leakage:.3e}  "
          f"gate_time {rep.gate_time:.3f}  isometry_defect {rep.diagnostics['isometry_defect']:.2e}")
    if args.min_fidelity is not None and rep.fidelity < args.min_fidelity:
        print(f"fidelity below requested minimum {args.min_fidelity}")
        return 1, [name], cfg.to_dict()
    return 0, [name], {**cfg.to_dict(), "schedule": sched.to_dict()}


def cmd_sweep(args, out: Path):
    if len(args.h_list) < 2:
        raise ConfigError("--h-list needs at least two values")
    if args.gate not in GATES:
        raise ConfigError(f"unknown gate {args.gate!r}")
    cfg = _config(args)
    from .interaction import ModelParams

    cfg = SimulationConfig(ModelParams(args.omega, args.omega, args.g), cfg.tr, cfg.step, 0, cfg.report_grid)
    rows = fidelity_sweep(args.gate, args.h_list, cfg, workers=args.workers)
    csv_name, json_name = f"sweep_{args.gate}.csv", f"sweep_{args.gate}.json"
    with open(out / csv_name, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["h_over_g", "fidelity", "leakage", "gate_time"])
        for r in rows:
            w.writerow([repr(r["h_over_g"]), repr(r["fidelity"]), repr(r["leakage"]), repr(r["gate_time"])])
    _dump(out / json_name, {
        "schema": SCHEMA,
        "target": args.gate,
        "rows": [{k: v for k, v in r.items() if k != "report"} for r in rows],
        "reports": [r["report"].to_dict() for r in rows],
        "strictly_improving": strictly_improving(rows),
    })
    for r in rows:
        print(f"h/g={r['h_over_g']:<8g} fidelity={r['fidelity']:.6f} leakage={r['leakage']:.3e} gate_time={r['gate_time']:.2f}")
    status = 0
    if args.require_monotone and not strictly_improving(rows):
        print("fidelity is not strictly improving as h decreases")
        status = 1
    return status, [csv_name, json_name], {"gate": args.gate, "h_list": list(args.h_list), **cfg.to_dict()}


def read_sweep_csv(path) -> List[dict]:
    with open(path, newline="") as fh:
        return [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]


# -- parser ---------------------------------------------------------------------------


def _common(p):
    p.add_argument("--out", default=".", help="output directory (created if missing)")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized suites")
    p.add_argument("-v", "--verbose", action="store_true")


def _physics(p):
    p.add_argument("--h1", type=_positive("h1"), default=0.01)
    p.add_argument("--g", type=_positive("g"), default=1.0)
    p.add_argument("--omega", type=_positive("omega"), default=1.0)


def _numerics(p):
    p.add_argument("--nmax", type=int, default=40)
    p.add_argument("--buffer", type=int, default=8)
    p.add_argument("--step", type=_positive("step"), default=1e-3)
    p.add_argument("--grid", type=int, default=0, help="number of sampled times per segment")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tcq", description="Cavity-mediated gate design and simulation.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run an oracle-equivalence suite")
    p.add_argument("scope", choices=list(SCOPES) + ["all"])
    _common(p)

    p = sub.add_parser("design", help="write a pulse schedule")
    p.add_argument("gate")
    _physics(p)
    _common(p)

    p = sub.add_parser("simulate", help="integrate a schedule and report the gate")
    p.add_argument("schedule")
    p.add_argument("--min-fidelity", type=float, default=None)
    _numerics(p)
    _common(p)

    p = sub.add_parser("sweep", help="fidelity over a list of h1/g values")
    p.add_argument("gate")
    p.add_argument("--h-list", type=_positive("h"), nargs="+", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--require-monotone", action="store_true")
    p.add_argument("--g", type=_positive("g"), default=1.0)
    p.add_argument("--omega", type=_positive("omega"), default=1.0)
    _numerics(p)
    _common(p)
    return ap


COMMANDS = {"verify": cmd_verify, "design": cmd_design, "simulate": cmd_simulate, "sweep": cmd_sweep}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:  # argparse reports usage errors with code 2
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    t0 = time.perf_counter()
    try:
        out.mkdir(parents=True, exist_ok=True)
        status, outputs, config = COMMANDS[args.command](args, out)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        status, outputs, config = 2, [], {"error": str(e)}
    except SimulationError as e:
        print(f"integrator guard: {e}", file=sys.stderr)
        status, outputs, config = 1, [], {"error": str(e)}
    if out.is_dir():
        _write_manifest(out, args.command, config, outputs, time.perf_counter() - t0, status)
    return status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
