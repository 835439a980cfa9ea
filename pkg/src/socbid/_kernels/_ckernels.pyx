# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: batch nonconvex storage cost and the oracle's product enumeration."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _segment(const double[::1] E, double e) noexcept nogil:
    cdef Py_ssize_t K = E.shape[0] - 1
    cdef Py_ssize_t lo = 0, hi = K, mid
    if e <= E[0]:
        return 0
    if e >= E[K]:
        return K - 1
    # largest k with E[k] <= e
    while hi - lo > 1:
        mid = (lo + hi) >> 1
        if E[mid] <= e:
            lo = mid
        else:
            hi = mid
    return lo


cdef inline double _stage(const double[::1] E, const double[::1] cc, const double[::1] cd,
                          double eta_c, double eta_d, double e, double gc, double gd,
                          double *e_next) noexcept nogil:
    cdef double en = e + gc * eta_c - gd / eta_d
    cdef Py_ssize_t m = _segment(E, e)
    cdef Py_ssize_t n = _segment(E, en)
    cdef Py_ssize_t k
    cdef double benefit = 0.0, cost = 0.0
    if n >= m:
        benefit = gc * cc[n]
        for k in range(m, n):
            benefit += (cc[k] - cc[k + 1]) / eta_c * (E[k + 1] - e)
    if n <= m:
        cost = gd * cd[n]
        for k in range(n + 1, m + 1):
            cost += eta_d * (cd[k - 1] - cd[k]) * (E[k] - e)
    e_next[0] = en
    return cost - benefit


def trajectory_costs(const double[::1] E, const double[::1] cc, const double[::1] cd,
                     double eta_c, double eta_d, double s,
                     const double[:, ::1] gc, const double[:, ::1] gd):
    cdef Py_ssize_t N = gc.shape[0], T = gc.shape[1], i, t
    cdef double e, en, total
    costs = np.empty(N, dtype=np.float64)
    final = np.empty(N, dtype=np.float64)
    cdef double[::1] cv = costs
    cdef double[::1] fv = final
    with nogil:
        for i in range(N):
            e = s
            total = 0.0
            for t in range(T):
                total += _stage(E, cc, cd, eta_c, eta_d, e, gc[i, t], gd[i, t], &en)
                e = en
            cv[i] = total
            fv[i] = e
    return costs, final


def enumerate_min(const cnp.int64_t[:, ::1] actions, const cnp.int64_t[::1] offsets,
                  const cnp.int64_t[::1] counts, const double[::1] sched_cost,
                  const double[:, ::1] gen_table, cnp.int64_t n_choices):
    cdef Py_ssize_t ns = offsets.shape[0], T = actions.shape[1]
    cdef Py_ssize_t i, t, row
    cdef cnp.int64_t flat, radix
    cdef double total, best = np.inf
    idx_arr = np.zeros(ns, dtype=np.int64)
    best_arr = np.full(ns, -1, dtype=np.int64)
    cdef cnp.int64_t[::1] idx = idx_arr
    cdef cnp.int64_t[::1] best_idx = best_arr
    for i in range(ns):
        if counts[i] == 0:
            return best, best_arr
    with nogil:
        while True:
            total = 0.0
            for i in range(ns):
                total += sched_cost[offsets[i] + idx[i]]
            for t in range(T):
                flat = 0
                radix = 1
                for i in range(ns):
                    row = offsets[i] + idx[i]
                    flat += actions[row, t] * radix
                    radix *= n_choices
                total += gen_table[t, flat]
            if total < best:
                best = total
                for i in range(ns):
                    best_idx[i] = idx[i]
            # odometer increment, first storage fastest
            i = 0
            while i < ns:
                idx[i] += 1
                if idx[i] < counts[i]:
                    break
                idx[i] = 0
                i += 1
            if i == ns:
                break
    return best, best_arr
