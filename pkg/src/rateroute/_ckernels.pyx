# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Semantics match ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, fabs

cnp.import_array()


def shortest_path_tree(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] nbr,
                       const cnp.int64_t[::1] eid, const double[::1] weights,
                       Py_ssize_t source):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, u, w, k, e, it
    cdef double nd, best_d
    cdef cnp.int64_t nh, best_h
    dist_a = np.full(n, np.inf)
    hops_a = np.full(n, n + 1, dtype=np.int64)
    pred_a = np.full(n, -1, dtype=np.int64)
    done_a = np.zeros(n, dtype=np.uint8)
    cdef double[::1] dist = dist_a
    cdef cnp.int64_t[::1] hops = hops_a
    cdef cnp.int64_t[::1] pred = pred_a
    cdef unsigned char[::1] done = done_a
    dist[source] = 0.0
    hops[source] = 0
    for it in range(n):
        u = -1
        best_d = INFINITY
        best_h = n + 2
        for i in range(n):
            if done[i] or dist[i] == INFINITY:
                continue
            if dist[i] < best_d or (dist[i] == best_d and hops[i] < best_h):
                u = i
                best_d = dist[i]
                best_h = hops[i]
        if u < 0:
            break
        done[u] = 1
        for k in range(indptr[u], indptr[u + 1]):
            w = nbr[k]
            if done[w]:
                continue
            e = eid[k]
            nd = dist[u] + weights[e]
            nh = hops[u] + 1
            if nd < dist[w] or (nd == dist[w] and nh < hops[w]):
                dist[w] = nd
                hops[w] = nh
                pred[w] = e
    return dist_a, hops_a, pred_a


cdef inline void _apply(Py_ssize_t p, cnp.int64_t a, const cnp.int64_t[::1] path_ptr,
                        const cnp.int64_t[::1] path_edges, cnp.int64_t[::1] loads,
                        const double[::1] table, cnp.int64_t cap,
                        double* total, Py_ssize_t* over) noexcept nogil:
    cdef Py_ssize_t t, e
    cdef cnp.int64_t old, new
    for t in range(path_ptr[p], path_ptr[p + 1]):
        e = path_edges[t]
        old = loads[e]
        new = old + a
        loads[e] = new
        if old > cap:
            over[0] -= 1
        else:
            total[0] -= table[old]
        if new > cap:
            over[0] += 1
        else:
            total[0] += table[new]


def oracle_scan(const cnp.int64_t[::1] demand_ptr, const cnp.int64_t[::1] path_ptr,
                const cnp.int64_t[::1] path_edges, const cnp.int64_t[::1] amounts,
                const double[::1] cost_table, cnp.int64_t cap, Py_ssize_t n_edges):
    cdef Py_ssize_t k = amounts.shape[0]
    cdef Py_ssize_t j
    if k == 0:
        return np.inf, np.zeros(0, dtype=np.int64), 0
    radix_a = np.asarray(demand_ptr[1:]) - np.asarray(demand_ptr[:-1])
    if radix_a.min() == 0:
        return np.inf, np.zeros(k, dtype=np.int64), 0
    cdef cnp.int64_t[::1] radix = np.ascontiguousarray(radix_a, dtype=np.int64)
    loads_a = np.zeros(n_edges, dtype=np.int64)
    choice_a = np.zeros(k, dtype=np.int64)
    best_a = np.zeros(k, dtype=np.int64)
    cdef cnp.int64_t[::1] loads = loads_a
    cdef cnp.int64_t[::1] choice = choice_a
    cdef cnp.int64_t[::1] best_choice = best_a
    cdef double total = 0.0
    cdef Py_ssize_t over = 0
    cdef double best = INFINITY
    cdef double scale
    cdef long long n_feasible = 0
    with nogil:
        for j in range(k):
            _apply(demand_ptr[j], amounts[j], path_ptr, path_edges, loads, cost_table, cap, &total, &over)
        while True:
            if over == 0:
                n_feasible += 1
                scale = 1.0
                if best < INFINITY and fabs(best) > 1.0:
                    scale = fabs(best)
                if total < best - 1e-9 * scale:
                    best = total
                    best_choice[:] = choice
            j = k - 1
            while j >= 0:
                _apply(demand_ptr[j] + choice[j], -amounts[j], path_ptr, path_edges, loads, cost_table, cap, &total, &over)
                choice[j] += 1
                if choice[j] < radix[j]:
                    _apply(demand_ptr[j] + choice[j], amounts[j], path_ptr, path_edges, loads, cost_table, cap, &total, &over)
                    break
                choice[j] = 0
                _apply(demand_ptr[j], amounts[j], path_ptr, path_edges, loads, cost_table, cap, &total, &over)
                j -= 1
            if j < 0:
                break
    return best, best_a, n_feasible
