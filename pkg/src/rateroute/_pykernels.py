"""Pure-Python implementations of the hot kernels.

These mirror ``_ckernels.pyx`` exactly, including tie-breaking, and are used
when the compiled module is unavailable.
"""

import heapq
import math

import numpy as np


def shortest_path_tree(indptr, nbr, eid, weights, source):
    """Dijkstra ordered by ``(distance, hop count, node index)``.

    Returns ``(dist, hops, pred_edge)``; ``pred_edge[v] == -1`` for the source
    and for unreachable nodes.
    """
    indptr = indptr.tolist()
    nbr = nbr.tolist()
    eid = eid.tolist()
    weights = weights.tolist()
    n = len(indptr) - 1
    dist = [math.inf] * n
    hops = [n + 1] * n
    pred = [-1] * n
    done = [False] * n
    dist[source] = 0.0
    hops[source] = 0
    heap = [(0.0, 0, source)]
    while heap:
        d, h, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for k in range(indptr[u], indptr[u + 1]):
            w = nbr[k]
            if done[w]:
                continue
            e = eid[k]
            nd = d + weights[e]
            nh = h + 1
            if nd < dist[w] or (nd == dist[w] and nh < hops[w]):
                dist[w] = nd
                hops[w] = nh
                pred[w] = e
                heapq.heappush(heap, (nd, nh, w))
    return np.array(dist), np.array(hops, dtype=np.int64), np.array(pred, dtype=np.int64)


def oracle_scan(demand_ptr, path_ptr, path_edges, amounts, cost_table, cap, n_edges):
    """Exhaustive scan over every combination of per-demand path choices.

    Combinations are visited in lexicographic order of the choice vector and
    a new incumbent must improve by more than a relative 1e-9, so among
    equal-cost optima the lexicographically smallest wins.

    Returns ``(best_cost, best_choice, n_feasible)``.
    """
    demand_ptr = demand_ptr.tolist()
    path_ptr = path_ptr.tolist()
    path_edges = path_edges.tolist()
    amounts = amounts.tolist()
    table = cost_table.tolist()
    k = len(amounts)
    radix = [demand_ptr[j + 1] - demand_ptr[j] for j in range(k)]
    if k == 0 or min(radix) == 0:
        return math.inf, np.zeros(k, dtype=np.int64), 0

    loads = [0] * n_edges
    state = {"total": 0.0, "over": 0}

    def apply(j, c, sign):
        p = demand_ptr[j] + c
        a = sign * amounts[j]
        total = state["total"]
        over = state["over"]
        for t in range(path_ptr[p], path_ptr[p + 1]):
            e = path_edges[t]
            old = loads[e]
            new = old + a
            loads[e] = new
            if old > cap:
                over -= 1
            else:
                total -= table[old]
            if new > cap:
                over += 1
            else:
                total += table[new]
        state["total"] = total
        state["over"] = over

    choice = [0] * k
    for j in range(k):
        apply(j, 0, 1)
    best = math.inf
    best_choice = list(choice)
    n_feasible = 0
    while True:
        if state["over"] == 0:
            n_feasible += 1
            total = state["total"]
            if total < best - 1e-9 * max(1.0, abs(best) if best < math.inf else 1.0):
                best = total
                best_choice = list(choice)
        j = k - 1
        while j >= 0:
            apply(j, choice[j], -1)
            choice[j] += 1
            if choice[j] < radix[j]:
                apply(j, choice[j], 1)
                break
            choice[j] = 0
            apply(j, 0, 1)
            j -= 1
        if j < 0:
            break
    return best, np.array(best_choice, dtype=np.int64), n_feasible
