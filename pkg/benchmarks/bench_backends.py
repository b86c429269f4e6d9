#!/usr/bin/env python3
"""Compare the compiled slot-loop kernel against the pure-python engine.

Runs the same seeded workloads on both backends, checks that the integer
trajectories agree, and reports slots/second. Usage:

    python benchmarks/bench_backends.py [--slots N] [--sizes s1,s2,...]
"""

import argparse
import time

import numpy as np

from aoinet import simulator as sim
from aoinet.geometry import sample_bipolar
from aoinet.params import Region, SystemParams, dbm_to_mw


def bench_case(lam: float, side: float, slots: int, seed: int) -> dict:
    params = SystemParams(lam=lam, r=0.5, alpha=3.8, theta=1.0, p=1.0, xi=0.5,
                          ptx=dbm_to_mw(17.0), sigma2=dbm_to_mw(-90.0))
    topo = sample_bipolar(params, Region(side), seed=seed)
    context = sim.prepare_context(topo, params)
    out = {"n_links": topo.n, "slots": slots}
    metrics = {}
    for backend in sim.available_backends():
        t0 = time.perf_counter()
        m = sim.run(topo, params, slots=slots, warmup=slots // 10, seed=seed,
                    backend=backend, context=context)
        out[backend] = time.perf_counter() - t0
        metrics[backend] = m
    if len(metrics) == 2:
        same = (np.array_equal(metrics["compiled"].deliveries,
                               metrics["python"].deliveries)
                and np.array_equal(metrics["compiled"].age_sum,
                                   metrics["python"].age_sum))
        out["trajectories_equal"] = bool(same)
    return out


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--slots", type=int, default=2000)
    ap.add_argument("--sizes", default="50,100,200",
                    help="comma-separated region side lengths (m) at lam=1e-2")
    args = ap.parse_args()

    print(f"backends available: {sim.available_backends()}")
    header = f"{'links':>6} {'slots':>6} {'compiled':>12} {'python':>12} {'speedup':>8}  equal"
    print(header)
    print("-" * len(header))
    for i, side in enumerate(float(s) for s in args.sizes.split(",")):
        row = bench_case(1e-2, side, args.slots, seed=10 + i)
        fast = row.get("compiled")
        slow = row.get("python")
        speed = f"{slow / fast:8.1f}x" if fast and slow else "     n/a"
        print(f"{row['n_links']:>6} {row['slots']:>6} "
              f"{(fast or float('nan')):>11.3f}s {(slow or float('nan')):>11.3f}s "
              f"{speed}  {row.get('trajectories_equal', '-')}")


if __name__ == "__main__":
    main()
