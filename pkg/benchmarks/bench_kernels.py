"""Compare the compiled and pure-Python kernels on the two hot loops.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from rateroute import OracleBudget, enumerate_paths, gen_random
from rateroute.kernels import get_backend
from rateroute.oracle import _flatten


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def dijkstra_case(nodes, seed=0):
    inst = gen_random(nodes, min(1.0 - 1e-9, 6.0 / nodes), 1, rng_seed=seed)
    net = inst.network
    indptr, nbr, eid = net.csr
    w = np.random.default_rng(seed).random(net.n_edges)

    def run(mod):
        return lambda: [mod.shortest_path_tree(indptr, nbr, eid, w, s) for s in range(net.n_nodes)]

    return f"shortest paths, {nodes} nodes / {net.n_edges} edges, all sources", run


def oracle_case(nodes, demands, seed=0):
    inst = gen_random(nodes, 0.5, demands, max_amount=2, rng_seed=seed)
    lists = [enumerate_paths(inst.network, d, OracleBudget()) for d in inst.demands]
    dp, pp, flat = _flatten(lists)
    amounts = inst.amounts.astype(np.int64)
    table, cap = inst.cost.cost_table(int(amounts.sum()))
    combos = int(np.prod([len(p.paths) for p in lists]))

    def run(mod):
        return lambda: mod.oracle_scan(dp, pp, flat, amounts, table, cap, inst.network.n_edges)

    return f"oracle scan, {combos} combinations", run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    py = get_backend("python")
    try:
        cy = get_backend("cython")
    except ImportError:
        print("compiled kernels not built; nothing to compare")
        return
    cases = [dijkstra_case(20), dijkstra_case(80), oracle_case(7, 3, seed=4), oracle_case(8, 4, seed=2)]
    print(f"{'case':<48} {'python':>10} {'cython':>10} {'speedup':>8}")
    for name, run in cases:
        tp = best_of(run(py), args.repeat)
        tc = best_of(run(cy), args.repeat)
        print(f"{name:<48} {tp * 1e3:>8.2f}ms {tc * 1e3:>8.2f}ms {tp / tc:>7.1f}x")


if __name__ == "__main__":
    main()
