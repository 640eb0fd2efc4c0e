"""Compare the numba and numpy RK4 backends on fixed problems.

    python benchmarks/bench_backends.py [--steps 2000]

Prints microseconds per step for each backend and the largest difference
between their final states.
"""
import argparse
import time

import numpy as np

from tcq.kernels import HAVE_NUMBA, rk4_propagate
from tcq.operators import FockTruncation
from tcq.pulses import design
from tcq.simulator import sector_basis


def problem(n, n_max):
    sb = sector_basis(n, FockTruncation(n_max, min(8, n_max - 1)))
    seg = design("CZ2" if n == 2 else "A").segments[0]
    amps = np.zeros(n, dtype=complex)
    freqs = np.zeros(n)
    amps[0] = seg.h * np.exp(1j * seg.phi)
    freqs[0] = seg.omega + 1.0
    Z = np.zeros((sb.dim, 2 ** n), dtype=complex)
    Z[np.arange(2 ** n) * (n_max + 1), np.arange(2 ** n)] = 1.0
    return sb, Z, amps, freqs


def run(backend, sb, Z, amps, freqs, steps):
    Z = Z.copy()
    t0 = time.perf_counter()
    rk4_propagate(Z, sb.lam, sb.offs, sb.sizes, sb.blocks, amps, freqs, 0.0, 1e-3, steps, backend)
    return Z, (time.perf_counter() - t0) / steps * 1e6


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    print(f"{'atoms':>5} {'n_max':>5} {'dim':>5} " + " ".join(f"{b + ' us/step':>16}" for b in backends) + f" {'speedup':>8} {'max diff':>9}")
    for n, n_max in [(2, 12), (2, 40), (3, 12), (3, 40)]:
        sb, Z, amps, freqs = problem(n, n_max)
        if "numba" in backends:
            run("numba", sb, Z, amps, freqs, 2)  # compile outside the timing
        res = {b: run(b, sb, Z, amps, freqs, args.steps) for b in backends}
        times = " ".join(f"{res[b][1]:>16.1f}" for b in backends)
        if len(backends) == 2:
            speed = res["numpy"][1] / res["numba"][1]
            diff = np.abs(res["numpy"][0] - res["numba"][0]).max()
            print(f"{n:>5} {n_max:>5} {sb.dim:>5} {times} {speed:>8.2f} {diff:>9.1e}")
        else:
            print(f"{n:>5} {n_max:>5} {sb.dim:>5} {times}")


if __name__ == "__main__":
    main()
