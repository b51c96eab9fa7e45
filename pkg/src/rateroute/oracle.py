"""Exact solver for small instances by exhaustive enumeration of routings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InfeasibleError, OracleBudgetError
from .model import Demand, IntegralSolution, Network, Path, PowerFit, StepCost
from .rounding import assign_rates, edge_loads


@dataclass(frozen=True)
class OracleBudget:
    max_paths_per_demand: int = 64
    max_combinations: int = 10**6

    def __post_init__(self):
        if self.max_paths_per_demand < 1 or self.max_combinations < 1:
            raise ValueError("oracle budgets must be positive")


@dataclass(frozen=True)
class PathList:
    paths: tuple[Path, ...]
    truncated: bool


def enumerate_paths(net: Network, demand: Demand, budget: OracleBudget | None = None) -> PathList:
    """All simple source-sink paths in lexicographic order of their
    ``(node index, edge id)`` step sequences, which is node-sequence order when
    there are no parallel edges. Parallel edges give distinct paths.

    At most ``budget.max_paths_per_demand`` paths are returned; ``truncated``
    flags that more exist.
    """
    budget = budget or OracleBudget()
    limit = budget.max_paths_per_demand
    indptr, nbr, eid = net.csr
    adj = []
    for u in range(net.n_nodes):
        arcs = [(int(nbr[k]), int(eid[k])) for k in range(indptr[u], indptr[u + 1])]
        adj.append(sorted(arcs))
    s, t = net.index[demand.source], net.index[demand.sink]
    found: list[tuple[list[int], list[int]]] = []
    on_path = [False] * net.n_nodes
    nodes, edges = [s], []
    on_path[s] = True
    truncated = False

    # Children are visited in (node index, edge id) order, so the DFS emits
    # paths already in the required order.
    def dfs(u):
        nonlocal truncated
        for w, e in adj[u]:
            if truncated:
                return
            if on_path[w]:
                continue
            nodes.append(w)
            edges.append(e)
            if w == t:
                if len(found) == limit:
                    truncated = True
                else:
                    found.append((list(nodes), list(edges)))
            else:
                on_path[w] = True
                dfs(w)
                on_path[w] = False
            nodes.pop()
            edges.pop()

    if s != t:
        dfs(s)
    names = net.nodes
    return PathList(tuple(Path(tuple(names[v] for v in n), tuple(e)) for n, e in found), truncated)


@dataclass(frozen=True)
class OracleResult:
    solution: IntegralSolution | None
    optimal_cost: float
    certified: bool
    choice: tuple[int, ...]
    combinations: int
    feasible_combinations: int
    objective: str = "f"

    def to_json(self) -> dict:
        sol = self.solution
        return {
            "optimal_cost": self.optimal_cost,
            "certified": self.certified,
            "objective": self.objective,
            "combinations": self.combinations,
            "feasible_combinations": self.feasible_combinations,
            "argmin_paths": {str(i): p.to_json() for i, p in enumerate(sol.paths)} if sol else {},
        }


def _flatten(path_lists: Sequence[PathList]):
    demand_ptr = [0]
    path_ptr = [0]
    flat: list[int] = []
    for pl in path_lists:
        for p in pl.paths:
            flat.extend(p.edges)
            path_ptr.append(len(flat))
        demand_ptr.append(len(path_ptr) - 1)
    return (np.array(demand_ptr, dtype=np.int64), np.array(path_ptr, dtype=np.int64),
            np.array(flat, dtype=np.int64))


def solve_exact(net: Network, demands: Sequence[Demand], cost: StepCost,
                budget: OracleBudget | None = None, fit: PowerFit | None = None) -> OracleResult:
    """Minimum-cost unsplittable routing by exhaustive search.

    With ``fit`` given, the objective is ``sum_e g(x_e)`` over all routings
    (no rate cap) instead of the step cost with the rate cap.
    Equal-cost optima resolve to the lexicographically smallest choice vector.
    """
    budget = budget or OracleBudget()
    lists = [enumerate_paths(net, d, budget) for d in demands]
    for i, pl in enumerate(lists):
        if not pl.paths:
            raise InfeasibleError(f"infeasible: no path for demand {i}")
    combos = math.prod(len(pl.paths) for pl in lists)
    if combos > budget.max_combinations:
        raise OracleBudgetError(
            f"instance too large for oracle: {combos} combinations > {budget.max_combinations}"
        )
    certified = not any(pl.truncated for pl in lists)
    amounts = np.array([d.amount for d in demands], dtype=np.int64)
    max_load = int(amounts.sum())
    if fit is None:
        table, cap = cost.cost_table(max_load)
    else:
        x = np.arange(max_load + 1, dtype=float)
        table = np.where(x > 0, fit.mu * np.power(x, fit.beta), 0.0)
        cap = max_load
    demand_ptr, path_ptr, flat = _flatten(lists)
    best, choice, n_feasible = kernels.oracle_scan(
        demand_ptr, path_ptr, flat, amounts, np.ascontiguousarray(table, dtype=float), int(cap), net.n_edges
    )
    objective = "f" if fit is None else "g"
    if not math.isfinite(best):
        return OracleResult(None, math.inf, certified, (), combos, 0, objective)
    choice = tuple(int(c) for c in choice)
    paths = [pl.paths[c] for pl, c in zip(lists, choice)]
    if fit is None:
        sol = assign_rates(net, paths, demands, cost)
        value = sol.total_cost
    else:
        loads = edge_loads(net.n_edges, paths, demands)
        value = float(sum(table[x] for x in loads.tolist()))
        sol = IntegralSolution(tuple(paths), loads, tuple(None if x == 0 else float(x) for x in loads), value)
    return OracleResult(sol, value, certified, choice, combos, int(n_feasible), objective)
