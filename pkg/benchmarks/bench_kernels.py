"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--quick]

Each workload runs on both backends with identical inputs; results are checked
for bit-identical output before timings are reported.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from isingopt import _backend
from isingopt.annealer import AnnealParams, AnnealSchedule, NoiseConfig, anneal
from isingopt.cim import CimParams, integrate
from isingopt.generators import random_ising
from isingopt.oracle import enumerate_ising


def workloads(quick: bool):
    rng = np.random.default_rng(0)
    m12 = random_ising(rng, 12)
    m24 = random_ising(rng, 24, density=0.5)
    sweeps = 100 if quick else 500
    restarts = 5 if quick else 50
    steps = 2000 if quick else 10000
    enum_n = 14 if quick else 18
    m_enum = random_ising(rng, enum_n)
    return [
        (f"anneal 12 spins, {restarts}x{sweeps} sweeps",
         lambda b: anneal(m12, AnnealParams(AnnealSchedule(sweeps=sweeps), restarts=restarts), backend=b),
         lambda r: (r.best_state.tobytes(), r.energy_trace.tobytes())),
        (f"anneal 24 spins, metropolis + noise, {restarts}x{sweeps}",
         lambda b: anneal(m24, AnnealParams(AnnealSchedule(sweeps=sweeps), restarts=restarts,
                                            noise=NoiseConfig(0.02, 0.01), update_rule="metropolis"), backend=b),
         lambda r: (r.best_state.tobytes(), r.energy_trace.tobytes())),
        (f"cim 24 spins, {steps} steps",
         lambda b: integrate(m24, CimParams(ramp_steps=steps), backend=b),
         lambda r: (r.final_amplitudes.tobytes(), r.trace.tobytes())),
        (f"enumerate {enum_n} spins",
         lambda b: enumerate_ising(m_enum, backend=b),
         lambda r: (r.best_states, r.best_value)),
    ]


def timed(fn, repeat):
    times, out = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times), out


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="smaller workloads")
    args = ap.parse_args(argv)
    backends = _backend.available()
    if "compiled" not in backends:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'workload':<48}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, run, key in workloads(args.quick):
        row = {}
        outs = {}
        for b in backends:
            row[b], outs[b] = timed(lambda: run(b), args.repeat)
        if len(backends) > 1 and key(outs["compiled"]) != key(outs["python"]):
            raise SystemExit(f"{name}: backends disagree")
        line = f"{name:<48}" + "".join(f"{row[b]:>11.3f}s" for b in backends)
        if len(backends) > 1:
            line += f"{row['python'] / row['compiled']:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
