"""Pure-Python versions of the compiled kernels, used when the extension is not built."""

from __future__ import annotations

import bisect
import math

import numpy as np


def _segment(E: list[float], e: float) -> int:
    K = len(E) - 1
    if e <= E[0]:
        return 0
    if e >= E[K]:
        return K - 1
    return bisect.bisect_right(E, e) - 1


def _stage(E, cc, cd, eta_c, eta_d, e, gc, gd):
    en = e + gc * eta_c - gd / eta_d
    m = _segment(E, e)
    n = _segment(E, en)
    benefit = 0.0
    cost = 0.0
    if n >= m:
        benefit = gc * cc[n]
        for k in range(m, n):
            benefit += (cc[k] - cc[k + 1]) / eta_c * (E[k + 1] - e)
    if n <= m:
        cost = gd * cd[n]
        for k in range(n + 1, m + 1):
            cost += eta_d * (cd[k - 1] - cd[k]) * (E[k] - e)
    return cost - benefit, en


def trajectory_costs(E, cc, cd, eta_c, eta_d, s, gc, gd):
    E, cc, cd = list(map(float, E)), list(map(float, cc)), list(map(float, cd))
    gc_rows = np.asarray(gc, dtype=float).tolist()
    gd_rows = np.asarray(gd, dtype=float).tolist()
    costs = np.empty(len(gc_rows))
    final = np.empty(len(gc_rows))
    for i, (crow, drow) in enumerate(zip(gc_rows, gd_rows)):
        e = s
        total = 0.0
        for c, d in zip(crow, drow):
            f, e = _stage(E, cc, cd, eta_c, eta_d, e, c, d)
            total += f
        costs[i] = total
        final[i] = e
    return costs, final


def enumerate_min(actions, offsets, counts, sched_cost, gen_table, n_choices):
    acts = np.asarray(actions).tolist()
    offsets = [int(o) for o in offsets]
    counts = [int(c) for c in counts]
    sched_cost = np.asarray(sched_cost).tolist()
    table = np.asarray(gen_table).tolist()
    ns = len(offsets)
    T = len(table)
    best = math.inf
    best_idx = np.full(ns, -1, dtype=np.int64)
    if any(c == 0 for c in counts):
        return best, best_idx
    idx = [0] * ns
    while True:
        rows = [offsets[i] + idx[i] for i in range(ns)]
        total = 0.0
        for r in rows:
            total += sched_cost[r]
        for t in range(T):
            flat = 0
            radix = 1
            for r in rows:
                flat += acts[r][t] * radix
                radix *= n_choices
            total += table[t][flat]
        if total < best:
            best = total
            best_idx[:] = idx
        i = 0
        while i < ns:
            idx[i] += 1
            if idx[i] < counts[i]:
                break
            idx[i] = 0
            i += 1
        if i == ns:
            break
    return best, best_idx
