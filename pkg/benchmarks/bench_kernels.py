"""Compare the compiled and pure-Python kernel backends.

Usage: python benchmarks/bench_kernels.py [--repeat N] [--trajectories N]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from socbid import _kernels
from socbid.oracle import GridSpec, brute_force_dispatch, oracle_case, random_edcr_asset, random_feasible_trajectory


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def trajectory_batch(n: int, T: int, seed: int):
    rng = np.random.default_rng(seed)
    a = random_edcr_asset(rng, K=5)
    trajs = [random_feasible_trajectory(a, T, rng) for _ in range(n)]
    gc = np.array([t.charge for t in trajs])
    gd = np.array([t.discharge for t in trajs])
    return (a.bid.boundaries, a.bid.charge_benefits, a.bid.discharge_costs, a.eta_c, a.eta_d, a.initial_soc, gc, gd)


def enumeration_problem(counts: tuple[int, ...], T: int, n_choices: int, seed: int):
    rng = np.random.default_rng(seed)
    counts_arr = np.array(counts)
    actions = rng.integers(0, n_choices, size=(counts_arr.sum(), T))
    offsets = np.concatenate(([0], np.cumsum(counts_arr)[:-1]))
    sched = rng.normal(size=counts_arr.sum())
    table = rng.normal(size=(T, n_choices ** len(counts)))
    return actions, offsets, counts_arr, sched, table, n_choices


def main() -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--trajectories", type=int, default=20_000)
    args = p.parse_args()

    backends = _kernels.available_backends()
    if "compiled" not in backends:
        print("compiled kernels not built; only the python backend is available")

    traj_args = trajectory_batch(args.trajectories, 8, 0)
    enum_args = enumeration_problem((300, 300), 3, 9, 1)
    case = oracle_case(0, 3)
    cases = [
        (f"trajectory_costs ({args.trajectories} x T=8, K=5)", lambda b: _kernels.trajectory_costs(*traj_args, backend=b)),
        ("enumerate_min (2 storages, 300x300 schedules, T=3)", lambda b: _kernels.enumerate_min(*enum_args, backend=b)),
        ("brute_force_dispatch (oracle case, 5 steps)", lambda b: brute_force_dispatch(case, GridSpec(5), backend=b)),
    ]

    print(f"{'kernel':<55}" + "".join(f"{b:>12}" for b in backends) + ("   speedup" if len(backends) == 2 else ""))
    for name, fn in cases:
        times = [best_of(lambda: fn(b), args.repeat) for b in backends]
        line = f"{name:<55}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) == 2:
            line += f"   {times[1] / times[0]:>6.1f}x"
        print(line)

    if len(backends) == 2:
        c1, _ = _kernels.trajectory_costs(*traj_args, backend="compiled")
        c2, _ = _kernels.trajectory_costs(*traj_args, backend="python")
        print(f"max |compiled - python| trajectory cost: {np.abs(c1 - c2).max():.2e}")


if __name__ == "__main__":
    main()
