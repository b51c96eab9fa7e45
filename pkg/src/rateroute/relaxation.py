"""Fractional multicommodity flow under the convex power-law cost.

Minimizes ``sum_e g(x_e)`` over fractional routings with a conditional
gradient (Frank-Wolfe) method. Each linear subproblem is an all-or-nothing
assignment of every demand to its shortest path under the marginal costs
``g'(x_e)``, which also yields the duality-gap certificate.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ConfigurationError, InfeasibleError
from .fitting import measure_gap
from .model import Demand, FractionalSolution, Network, PowerFit, StepCost

logger = logging.getLogger(__name__)

STEP_RULES = ("line_search", "diminishing")


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 5000
    rel_gap_tol: float = 1e-4
    step_rule: str = "line_search"
    epsilon_flow: float = 1e-6
    clamp_beta: bool = False
    pairwise: bool = True

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigurationError("max_iterations must be at least 1")
        if not 0 < self.rel_gap_tol < 1:
            raise ConfigurationError("rel_gap_tol must lie in (0, 1)")
        if self.step_rule not in STEP_RULES:
            raise ConfigurationError(f"step_rule must be one of {STEP_RULES}")
        if not 0 < self.epsilon_flow < 1e-2:
            raise ConfigurationError("epsilon_flow must be small and positive")


def convex_parameters(fit: PowerFit, clamp_beta: bool = False) -> tuple[float, float]:
    if fit.beta < 1:
        if not clamp_beta:
            raise ConfigurationError(
                f"non-convex objective: fitted beta = {fit.beta:.6g} < 1 (use clamp_beta to force beta = 1)"
            )
        return fit.mu, 1.0
    return fit.mu, fit.beta


class _AllOrNothing:
    """Shortest-path assignment of every demand, grouped by source."""

    def __init__(self, net: Network, demands: Sequence[Demand]):
        self.net = net
        self.k = len(demands)
        self.E = net.n_edges
        self.indptr, self.nbr, self.eid = net.csr
        self.ends = [tuple(e) for e in net.endpoints.tolist()]
        idx = net.index
        self.src = [idx[d.source] for d in demands]
        self.dst = [idx[d.sink] for d in demands]
        self.amount = np.array([d.amount for d in demands], dtype=float)
        self.groups: dict[int, list[int]] = defaultdict(list)
        for i, s in enumerate(self.src):
            self.groups[s].append(i)

    def __call__(self, weights: np.ndarray):
        fwd = np.zeros((self.k, self.E))
        bwd = np.zeros((self.k, self.E))
        w = np.ascontiguousarray(weights, dtype=float)
        ends = self.ends
        for s, members in self.groups.items():
            dist, _, pred = kernels.shortest_path_tree(self.indptr, self.nbr, self.eid, w, s)
            for i in members:
                v = self.dst[i]
                if not np.isfinite(dist[v]):
                    raise InfeasibleError(f"infeasible: no path for demand {i}")
                a = self.amount[i]
                while v != s:
                    e = int(pred[v])
                    u0, v0 = ends[e]
                    if v0 == v:
                        fwd[i, e] = a
                        v = u0
                    else:
                        bwd[i, e] = a
                        v = v0
        return fwd, bwd


def _min_hop_split(net: Network, demands: Sequence[Demand]):
    """Each demand spread uniformly over all of its minimum-hop paths.

    Arc ``u -> v`` on the min-hop DAG carries ``d * N_s(u) * N_t(v) / N_s(t)``
    where ``N`` counts shortest paths (parallel edges counted separately).
    """
    k, E = len(demands), net.n_edges
    fwd = np.zeros((k, E))
    bwd = np.zeros((k, E))
    ends = net.endpoints.tolist()
    idx = net.index
    for i, d in enumerate(demands):
        s, t = idx[d.source], idx[d.sink]
        ds, ns = _bfs_counts(net, s)
        dt, nt = _bfs_counts(net, t)
        D, total = ds[t], ns[t]
        for e, (a, b) in enumerate(ends):
            for u, v, out in ((a, b, fwd), (b, a, bwd)):
                if ds[u] >= 0 and dt[v] >= 0 and ds[u] + 1 + dt[v] == D:
                    out[i, e] = d.amount * ns[u] * nt[v] / total
    return fwd, bwd


def _bfs_counts(net: Network, root: int):
    indptr, nbr, _ = net.csr
    n = net.n_nodes
    dist = [-1] * n
    count = [0.0] * n
    dist[root], count[root] = 0, 1.0
    frontier = [root]
    while frontier:
        nxt = []
        for u in frontier:
            for k in range(indptr[u], indptr[u + 1]):
                w = int(nbr[k])
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
                if dist[w] == dist[u] + 1:
                    count[w] += count[u]
        frontier = nxt
    return dist, count


def _pairwise_step(mu, beta, x, amount, s_only, a_only, limit, iters=60):
    """Fraction of the demand to move from the away path to the shortest path:
    exact minimizer over ``[0, limit]`` by bisection on the derivative."""
    xs, xa = x[s_only], x[a_only]

    def slope(delta):
        up = np.power(xs + amount * delta, beta - 1.0).sum()
        down = np.power(np.maximum(xa - amount * delta, 0.0), beta - 1.0).sum()
        return mu * beta * amount * (up - down)

    if slope(limit) <= 0:
        return limit
    lo, hi = 0.0, limit
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if slope(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


class _PathFlows:
    """Per-demand path sets with weights (fractions of the demand)."""

    def __init__(self, net: Network, demands: Sequence[Demand], fwd: np.ndarray, bwd: np.ndarray):
        from .rounding import bottleneck_paths

        self.ends = [tuple(e) for e in net.endpoints.tolist()]
        self.E = net.n_edges
        self.amount = np.array([d.amount for d in demands], dtype=float)
        idx = net.index
        self.active: list[dict[tuple, list]] = []
        for i, d in enumerate(demands):
            row = fwd[i] - bwd[i]
            found, _ = bottleneck_paths(self.ends, row, idx[d.source], idx[d.sink], 1e-12)
            total = sum(w for _, _, w in found)
            paths = {}
            for nodes, edges, w in found:
                dirs = [1 if self.ends[e][0] == nodes[j] else -1 for j, e in enumerate(edges)]
                paths[tuple(edges)] = [np.array(edges, dtype=np.int64), np.array(dirs), w / total]
            self.active.append(paths)

    def loads(self) -> np.ndarray:
        x = np.zeros(self.E)
        for i, paths in enumerate(self.active):
            for edges, _, w in paths.values():
                x[edges] += self.amount[i] * w
        return x

    def arc_flows(self):
        k = len(self.active)
        fwd = np.zeros((k, self.E))
        bwd = np.zeros((k, self.E))
        for i, paths in enumerate(self.active):
            for edges, dirs, w in paths.values():
                f = self.amount[i] * w
                np.add.at(fwd[i], edges[dirs > 0], f)
                np.add.at(bwd[i], edges[dirs < 0], f)
        return fwd, bwd


def _trace(pred, ends, s, t):
    edges, dirs = [], []
    v = t
    while v != s:
        e = int(pred[v])
        a, b = ends[e]
        if b == v:
            dirs.append(1)
            v = a
        else:
            dirs.append(-1)
            v = b
        edges.append(e)
    edges.reverse()
    dirs.reverse()
    return np.array(edges, dtype=np.int64), np.array(dirs)


def _line_search(mu, beta, x, d, iters=80):
    """Exact minimizer over [0, 1] of ``sum g(x + a d)`` by bisection on the
    (monotone) derivative."""

    def slope(a):
        y = np.maximum(x + a * d, 0.0)
        return float(np.dot(mu * beta * np.power(y, beta - 1.0), d))

    if slope(1.0) <= 0:
        return 1.0
    lo, hi = 0.0, 1.0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if slope(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def solve_fractional(net: Network, demands: Sequence[Demand], fit: PowerFit,
                     cfg: SolverConfig | None = None) -> FractionalSolution:
    cfg = cfg or SolverConfig()
    mu, beta = convex_parameters(fit, cfg.clamp_beta)
    for i, d in enumerate(demands):
        if not net.connected(d.source, d.sink):
            raise InfeasibleError(f"infeasible: no path for demand {i} ({d.source} -> {d.sink})")

    k, E = len(demands), net.n_edges
    if k == 0:
        z = np.zeros((0, E))
        return FractionalSolution(z, np.zeros(E), 0.0, 0.0, 0.0, 0, True)

    g = lambda x: mu * np.power(x, beta)
    dg = lambda x: mu * beta * np.power(x, beta - 1.0)
    aon = _AllOrNothing(net, demands)
    # Start from the even split over min-hop paths: optimal outright when g is
    # linear (beta = 1), and the hop-count tie-break of g'(0) = 0 otherwise.
    fwd, bwd = _min_hop_split(net, demands)
    pairwise = cfg.pairwise and cfg.step_rule == "line_search"
    if pairwise:
        pf = _PathFlows(net, demands, fwd, bwd)
        fwd, bwd = pf.arc_flows()
    lower = -np.inf
    history = []
    converged = False
    it = 0
    rel_gap = np.inf
    for it in range(1, cfg.max_iterations + 1):
        x = (fwd + bwd).sum(axis=0)
        obj = float(np.sum(g(x)))
        history.append(obj)
        grad = dg(x)
        s_fwd, s_bwd = aon(grad)
        xs = (s_fwd + s_bwd).sum(axis=0)
        d = xs - x
        gap_abs = float(-np.dot(grad, d))
        lower = max(lower, obj - gap_abs)
        rel_gap = (obj - lower) / obj
        if rel_gap <= cfg.rel_gap_tol:
            converged = True
            break
        if pairwise:
            _pairwise_sweep(pf, aon, mu, beta)
            fwd, bwd = pf.arc_flows()
            continue
        if cfg.step_rule == "line_search":
            alpha = _line_search(mu, beta, x, d)
        else:
            alpha = 2.0 / (it + 2.0)
        fwd += alpha * (s_fwd - fwd)
        bwd += alpha * (s_bwd - bwd)
    else:
        logger.warning("conditional gradient stopped at max_iterations with relative gap %.3g", rel_gap)

    # Opposite-direction flow of one demand on one edge cancels; this can only
    # lower the loads, so the certificate stays valid.
    flow = fwd - bwd
    loads = np.abs(flow).sum(axis=0)
    obj = float(np.sum(g(loads)))
    gap = max(0.0, (obj - lower) / obj)
    flow.setflags(write=False)
    loads.setflags(write=False)
    return FractionalSolution(
        flow=flow,
        loads=loads,
        objective=obj,
        duality_gap=gap,
        lower_objective=float(lower),
        iterations=it,
        converged=converged or gap <= cfg.rel_gap_tol,
        history=tuple(history),
    )


def _pairwise_sweep(pf: _PathFlows, aon: _AllOrNothing, mu: float, beta: float):
    """One pass over the demands, each moving mass from its costliest active
    path to its current shortest path."""
    x = pf.loads()
    for i, paths in enumerate(pf.active):
        grad = mu * beta * np.power(x, beta - 1.0)
        s = aon.src[i]
        _, _, pred = kernels.shortest_path_tree(aon.indptr, aon.nbr, aon.eid, grad, s)
        edges, dirs = _trace(pred, pf.ends, s, aon.dst[i])
        key = tuple(edges.tolist())
        c_short = grad[edges].sum()
        away_key, away = max(paths.items(), key=lambda kv: (grad[kv[1][0]].sum(), kv[0]))
        c_away = grad[away[0]].sum()
        if away_key == key or c_away - c_short <= 1e-15 * max(1.0, c_away):
            continue
        in_s, in_a = set(key), set(away_key)
        s_only = np.array(sorted(in_s - in_a), dtype=np.int64)
        a_only = np.array(sorted(in_a - in_s), dtype=np.int64)
        a = pf.amount[i]
        delta = _pairwise_step(mu, beta, x, a, s_only, a_only, away[2])
        if delta <= 0:
            continue
        x[s_only] += a * delta
        x[a_only] -= a * delta
        np.maximum(x, 0.0, out=x)
        if key not in paths:
            paths[key] = [edges, dirs, 0.0]
        paths[key][2] += delta
        if delta >= away[2]:
            del paths[away_key]
        else:
            away[2] -= delta


def conservation_residual(net: Network, demands: Sequence[Demand], sol: FractionalSolution) -> np.ndarray:
    """Per-demand max absolute violation of flow conservation, relative to the demand amount."""
    n = net.n_nodes
    ends = net.endpoints
    out = np.zeros(len(demands))
    for i, d in enumerate(demands):
        bal = np.zeros(n)
        np.add.at(bal, ends[:, 0], sol.flow[i])
        np.add.at(bal, ends[:, 1], -sol.flow[i])
        bal[net.index[d.source]] -= d.amount
        bal[net.index[d.sink]] += d.amount
        out[i] = np.max(np.abs(bal)) / d.amount
    return out


def fractional_lower_bound(sol: FractionalSolution, cost: StepCost, fit: PowerFit) -> float:
    """Lower bound on the optimal integral cost under the step function.

    Divides the fractional objective by ``max(phi, gap)``: when the measured
    gap respects ``phi`` this is ``objective / phi``, otherwise the measured
    gap keeps the bound valid.
    """
    return sol.objective / max(fit.phi, measure_gap(cost, fit))
