"""Randomized rounding of a fractional routing to one path per demand.

Each demand's fractional flow is decomposed into weighted simple paths by
repeated bottleneck extraction; one path is then drawn per demand with
probability proportional to its weight, and every used link is set to the
smallest rate that carries its load.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import InfeasibleError, MalformedFlowError, RateOverflowError, RoutingError
from .model import Demand, FractionalSolution, IntegralSolution, Network, Path, PowerFit, StepCost


@dataclass(frozen=True)
class PathDecomposition:
    demand: int
    amount: int
    paths: tuple[Path, ...]
    weights: tuple[float, ...]
    residual: float = 0.0
    extractions: int = 0

    @property
    def total_weight(self) -> float:
        return float(sum(self.weights))

    @property
    def probabilities(self) -> np.ndarray:
        w = np.asarray(self.weights, dtype=float)
        return w / w.sum()


def _extract_simple_path(out_arcs, residual, s, t):
    """DFS from ``s`` preferring arcs with the most remaining flow, then the
    lowest edge id. Returns ``(nodes, edges)`` or ``None``."""
    visited = {s}
    nodes, edges = [s], []
    stack = [iter(_ordered(out_arcs, residual, s))]
    while stack:
        nxt = next(stack[-1], None)
        if nxt is None:
            stack.pop()
            if edges:
                edges.pop()
                nodes.pop()
            continue
        e, w = nxt
        if w in visited or residual.get(e, 0.0) <= 0:
            continue
        visited.add(w)
        nodes.append(w)
        edges.append(e)
        if w == t:
            return nodes, edges
        stack.append(iter(_ordered(out_arcs, residual, w)))
    return None


def _ordered(out_arcs, residual, u):
    arcs = [(e, w) for e, w in out_arcs.get(u, ()) if e in residual]
    arcs.sort(key=lambda a: (-residual[a[0]], a[0]))
    return arcs


def bottleneck_paths(ends, row, s, t, epsilon):
    """Repeatedly extract a simple ``s -> t`` path from the oriented support of
    ``row`` and subtract its bottleneck.

    ``ends[e]`` gives the endpoint indices of edge ``e``; a positive
    ``row[e]`` flows from ``ends[e][0]`` to ``ends[e][1]``. Returns
    ``([(nodes, edges, weight), ...], leftover_mass)``.
    """
    residual: dict[int, float] = {}
    out_arcs: dict[int, list[tuple[int, int]]] = {}
    for e, (a, b) in enumerate(ends):
        f = row[e]
        if abs(f) < epsilon:
            continue
        tail, head = (a, b) if f > 0 else (b, a)
        residual[e] = abs(f)
        out_arcs.setdefault(tail, []).append((e, head))

    found = []
    while True:
        path = _extract_simple_path(out_arcs, residual, s, t)
        if path is None:
            break
        nodes, edges = path
        w = min(residual[e] for e in edges)
        for e in edges:
            r = residual[e] - w
            if r < epsilon:
                del residual[e]
            else:
                residual[e] = r
        found.append((nodes, edges, w))
        if len(found) > len(ends):
            break
    return found, float(sum(residual.values()))


def decompose_flow(net: Network, demands: Sequence[Demand], sol: FractionalSolution,
                   demand_index: int, epsilon: float = 1e-6) -> PathDecomposition:
    """Split one demand's flow into weighted simple source-sink paths.

    Edges carrying less than ``epsilon`` are dropped from the support, so the
    extracted weight matches the demand to within ``epsilon * |E|``; cyclic
    leftovers are reported in ``residual``.
    """
    d = demands[demand_index]
    ends = net.endpoints.tolist()
    row = np.asarray(sol.flow[demand_index], dtype=float)
    s, t = net.index[d.source], net.index[d.sink]

    bal = np.zeros(net.n_nodes)
    for e, (a, b) in enumerate(ends):
        bal[a] += row[e]
        bal[b] -= row[e]
    bal[s] -= d.amount
    bal[t] += d.amount
    tol = max(epsilon, 1e-9) * max(1, d.amount)
    if np.max(np.abs(bal), initial=0.0) > tol:
        raise MalformedFlowError(
            f"malformed fractional flow for demand {demand_index}: conservation residual {np.max(np.abs(bal)):.3g}"
        )

    found, residual = bottleneck_paths(ends, row, s, t, epsilon)
    if len(found) > net.n_edges:
        raise RoutingError("path extraction did not terminate within |E| steps")
    paths = [Path(tuple(net.nodes[v] for v in nodes), tuple(edges)) for nodes, edges, _ in found]
    weights = [w for _, _, w in found]
    return PathDecomposition(
        demand=demand_index,
        amount=d.amount,
        paths=tuple(paths),
        weights=tuple(weights),
        residual=residual,
        extractions=len(paths),
    )


def decompose_all(net, demands, sol, epsilon=1e-6) -> list[PathDecomposition]:
    return [decompose_flow(net, demands, sol, i, epsilon) for i in range(len(demands))]


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_indices(decomps: Sequence[PathDecomposition], rng_seed) -> list[int]:
    rng = _rng(rng_seed)
    out = []
    for dec in decomps:
        if not dec.paths:
            raise InfeasibleError(f"no path to sample for demand {dec.demand}")
        cdf = np.cumsum(dec.probabilities)
        cdf[-1] = 1.0
        out.append(int(np.searchsorted(cdf, rng.random(), side="right")))
    return out


def sample_paths(decomps: Sequence[PathDecomposition], rng_seed) -> list[Path]:
    """Draw one path per demand, independently, with probability proportional
    to its decomposition weight."""
    idx = sample_indices(decomps, rng_seed)
    return [dec.paths[j] for dec, j in zip(decomps, idx)]


def edge_loads(n_edges: int, paths: Sequence[Path], demands: Sequence[Demand]) -> np.ndarray:
    loads = np.zeros(n_edges, dtype=np.int64)
    for p, d in zip(paths, demands):
        for e in p.edges:
            loads[e] += d.amount
    return loads


def assign_rates(net: Network, paths: Sequence[Path], demands: Sequence[Demand],
                 cost: StepCost) -> IntegralSolution:
    loads = edge_loads(net.n_edges, paths, demands)
    rates: list[float | None] = []
    total = 0.0
    for e, x in enumerate(loads.tolist()):
        if x == 0:
            rates.append(None)
            continue
        if x > cost.max_rate:
            raise RateOverflowError(e, x, cost.max_rate)
        j = cost.state(x)
        rates.append(cost.rates[j])
        total += cost.costs[j]
    loads.setflags(write=False)
    return IntegralSolution(tuple(paths), loads, tuple(rates), total)


def g_cost(loads: np.ndarray, fit: PowerFit) -> float:
    """``sum_e g(x_e)`` over used edges."""
    x = np.asarray(loads, dtype=float)
    x = x[x > 0]
    return float(np.sum(fit.mu * np.power(x, fit.beta)))


@dataclass
class RoundingResult:
    best: IntegralSolution
    trials: int
    feasible: int
    overflow: int
    costs: list[float] = field(repr=False)
    g_costs: list[float] = field(repr=False)
    best_trial: int = 0
    hypothesis: bool = False
    bound_factor: float = float("nan")
    bound_violations: int = 0
    max_bound_ratio: float = float("nan")
    lambda_emp: float = float("nan")

    @property
    def mean(self) -> float:
        return float(np.mean(self.costs))

    @property
    def min(self) -> float:
        return float(np.min(self.costs))

    @property
    def max(self) -> float:
        return float(np.max(self.costs))

    def stats(self) -> dict:
        return {
            "count": self.trials,
            "feasible": self.feasible,
            "overflow": self.overflow,
            "mean": self.mean,
            "min": self.min,
            "max": self.max,
            "best_trial": self.best_trial,
            "lambda_emp": self.lambda_emp,
            "bound_hypothesis": self.hypothesis,
            "bound_factor": self.bound_factor,
            "bound_violations": self.bound_violations,
            "max_bound_ratio": self.max_bound_ratio,
        }


def trial_seeds(rng_seed, trials: int) -> list[np.random.SeedSequence]:
    return np.random.SeedSequence(rng_seed).spawn(trials)


def randomized_round(net: Network, demands: Sequence[Demand], cost: StepCost, fit: PowerFit,
                     sol: FractionalSolution, trials: int = 100, rng_seed=0,
                     epsilon: float = 1e-6, hypothesis: bool | None = None,
                     decomps: Sequence[PathDecomposition] | None = None) -> RoundingResult:
    """Repeat path sampling and rate assignment ``trials`` times and keep the
    cheapest feasible outcome.

    Trials whose loads exceed the largest rate are discarded. Each trial also
    checks ``C_f <= phi * sigma * sum_e g(x_e)``; violations are counted only
    when ``hypothesis`` (the power law meets every step) is true, which by
    default is determined from ``cost`` and ``fit``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if hypothesis is None:
        from .fitting import intersects_each_step

        hypothesis = intersects_each_step(cost, fit)
    if decomps is None:
        decomps = decompose_all(net, demands, sol, epsilon)
    factor = fit.phi * fit.sigma
    best = None
    best_trial = -1
    costs, gcosts = [], []
    overflow = 0
    violations = 0
    max_ratio = 0.0
    for t, seq in enumerate(trial_seeds(rng_seed, trials)):
        paths = sample_paths(decomps, np.random.default_rng(seq))
        try:
            cand = assign_rates(net, paths, demands, cost)
        except RateOverflowError:
            overflow += 1
            continue
        cg = g_cost(cand.loads, fit)
        costs.append(cand.total_cost)
        gcosts.append(cg)
        ratio = cand.total_cost / (factor * cg) if cg > 0 else 0.0
        max_ratio = max(max_ratio, ratio)
        if hypothesis and ratio > 1 + 1e-12:
            violations += 1
        if best is None or cand.total_cost < best.total_cost:
            best, best_trial = cand, t
    if best is None:
        raise InfeasibleError(f"no feasible rounding found in {trials} trials")
    lam = float(np.mean(gcosts)) / sol.objective if sol.objective > 0 else float("nan")
    return RoundingResult(
        best=best,
        trials=trials,
        feasible=len(costs),
        overflow=overflow,
        costs=costs,
        g_costs=gcosts,
        best_trial=best_trial,
        hypothesis=bool(hypothesis),
        bound_factor=factor,
        bound_violations=violations,
        max_bound_ratio=max_ratio,
        lambda_emp=lam,
    )
