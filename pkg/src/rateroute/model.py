"""Core domain types, instance validation and the instance JSON format."""

from __future__ import annotations

import json
import math
from bisect import bisect_left
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, InvalidInstanceError


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Network:
    """Undirected multigraph. Edge ``i`` is ``edges[i] == (u, v)``."""

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.nodes)}

    @cached_property
    def endpoints(self) -> np.ndarray:
        """``(E, 2)`` array of endpoint node indices."""
        idx = self.index
        return _frozen([[idx[u], idx[v]] for u, v in self.edges] or np.empty((0, 2)), dtype=np.int64)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Adjacency as ``(indptr, neighbor, edge_id)``; each node's incident
        edges are listed in edge-id order."""
        n = self.n_nodes
        incident: list[list[tuple[int, int]]] = [[] for _ in range(n)]
        for e, (a, b) in enumerate(self.endpoints.tolist()):
            incident[a].append((b, e))
            incident[b].append((a, e))
        indptr = np.zeros(n + 1, dtype=np.int64)
        nbr, eid = [], []
        for v in range(n):
            lst = sorted(incident[v], key=lambda t: t[1])
            indptr[v + 1] = indptr[v] + len(lst)
            nbr.extend(t[0] for t in lst)
            eid.extend(t[1] for t in lst)
        return indptr, np.array(nbr, dtype=np.int64), np.array(eid, dtype=np.int64)

    def components(self) -> list[int]:
        """Connected-component label for every node index."""
        n = self.n_nodes
        label = [-1] * n
        indptr, nbr, _ = self.csr
        c = 0
        for s in range(n):
            if label[s] >= 0:
                continue
            label[s] = c
            stack = [s]
            while stack:
                u = stack.pop()
                for k in range(indptr[u], indptr[u + 1]):
                    w = int(nbr[k])
                    if label[w] < 0:
                        label[w] = c
                        stack.append(w)
            c += 1
        return label

    def connected(self, u: str, v: str) -> bool:
        lab = self.components()
        return lab[self.index[u]] == lab[self.index[v]]


@dataclass(frozen=True)
class Demand:
    source: str
    sink: str
    amount: int = 1


@dataclass(frozen=True)
class StepCost:
    """Discrete rate table: ``rates[i]`` costs ``costs[i]``."""

    rates: tuple[float, ...]
    costs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(r) for r in self.rates))
        object.__setattr__(self, "costs", tuple(float(c) for c in self.costs))

    @property
    def m(self) -> int:
        return len(self.rates)

    @property
    def max_rate(self) -> float:
        return self.rates[-1]

    def problems(self) -> list[str]:
        out = []
        if len(self.rates) != len(self.costs):
            out.append("rates and costs differ in length")
        if not self.rates:
            out.append("empty rate table")
            return out
        if any(b <= a for a, b in zip(self.rates, self.rates[1:])):
            out.append("rates not strictly increasing")
        if any(b < a for a, b in zip(self.costs, self.costs[1:])):
            out.append("costs not non-decreasing")
        if any(not c > 0 for c in self.costs):
            out.append("costs not strictly positive")
        if self.rates[0] < 1:
            out.append("smallest rate below 1")
        if any(not math.isfinite(v) for v in self.rates + self.costs):
            out.append("non-finite rate or cost")
        return out

    def state(self, x: float) -> int:
        """Index of the minimal rate that supports load ``x``."""
        if not x > 0:
            raise DomainError(f"load must be positive, got {x}")
        if x > self.rates[-1]:
            raise DomainError(f"load {x} exceeds maximum rate {self.rates[-1]}")
        return bisect_left(self.rates, x)

    def __call__(self, x: float) -> float:
        return self.costs[self.state(x)]

    def cost_table(self, max_load: int) -> tuple[np.ndarray, int]:
        """Cost of each integer load ``0..max_load`` (idle edges cost 0) and the
        largest load the table can carry."""
        cap = int(math.floor(self.rates[-1]))
        table = np.zeros(max_load + 1)
        for x in range(1, min(max_load, cap) + 1):
            table[x] = self(x)
        return table, cap


def step_cost_eval(cost: StepCost, x: float) -> float:
    return cost(x)


@dataclass(frozen=True)
class PowerFit:
    """Fitted power law ``g(x) = mu * x**beta`` together with its error statistics."""

    mu: float
    beta: float
    gap: float
    sigma: float
    phi: float

    @property
    def log_mu(self) -> float:
        return math.log(self.mu)

    def __call__(self, x):
        return self.mu * np.power(x, self.beta)

    def derivative(self, x):
        return self.mu * self.beta * np.power(x, self.beta - 1.0)


@dataclass(frozen=True)
class Path:
    """Simple path given by its node sequence and the edge ids between them."""

    nodes: tuple[str, ...]
    edges: tuple[int, ...]

    def __len__(self):
        return len(self.edges)

    def is_simple(self) -> bool:
        return len(set(self.nodes)) == len(self.nodes)

    def to_json(self) -> dict:
        return {"nodes": list(self.nodes), "edges": list(self.edges)}


@dataclass(frozen=True)
class FractionalSolution:
    """Fractional multicommodity flow.

    ``flow[i, e]`` is the net flow of demand ``i`` along edge ``e`` oriented
    from ``edges[e][0]`` to ``edges[e][1]``; its magnitude is the fraction of
    the demand carried by the edge.
    """

    flow: np.ndarray
    loads: np.ndarray
    objective: float
    duality_gap: float
    lower_objective: float
    iterations: int
    converged: bool
    history: tuple[float, ...] = field(default=(), repr=False)

    def fractions(self, i: int, epsilon: float = 0.0) -> dict[int, float]:
        row = np.abs(self.flow[i])
        return {int(e): float(row[e]) for e in np.flatnonzero(row > epsilon)}


@dataclass(frozen=True)
class IntegralSolution:
    paths: tuple[Path, ...]
    loads: np.ndarray
    rates: tuple[float | None, ...]
    total_cost: float

    def used_edges(self) -> list[int]:
        return [e for e, r in enumerate(self.rates) if r is not None]


@dataclass(frozen=True)
class Instance:
    network: Network
    demands: tuple[Demand, ...]
    cost: StepCost

    def __post_init__(self):
        object.__setattr__(self, "demands", tuple(self.demands))

    @property
    def amounts(self) -> np.ndarray:
        return np.array([d.amount for d in self.demands], dtype=np.int64)


@dataclass
class ValidationReport:
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_invalid(self):
        if self.violations:
            raise InvalidInstanceError(self.violations)


def validate_instance(net: Network, demands: Sequence[Demand], cost: StepCost) -> ValidationReport:
    """Check the static structure of an instance; never raises."""
    v: list[str] = []
    nodes = set(net.nodes)
    if len(nodes) != len(net.nodes):
        v.append("duplicate node identifiers")
    structure_ok = True
    for e, (a, b) in enumerate(net.edges):
        if a not in nodes or b not in nodes:
            v.append(f"edge {e} has an undeclared endpoint")
            structure_ok = False
        elif a == b:
            v.append(f"edge {e} is a self-loop")
    for i, d in enumerate(demands):
        if d.source not in nodes or d.sink not in nodes:
            v.append(f"demand {i} references an undeclared node")
            continue
        if d.source == d.sink:
            v.append(f"demand {i} is a degenerate demand (source = sink)")
        if not isinstance(d.amount, (int, np.integer)) or isinstance(d.amount, bool) or d.amount < 1:
            v.append(f"demand {i} amount must be a positive integer")
        if structure_ok and d.source != d.sink and not net.connected(d.source, d.sink):
            v.append(f"demand {i} is disconnected ({d.source} -> {d.sink})")
    v.extend(cost.problems())
    return ValidationReport(v)


# --- JSON --------------------------------------------------------------------


def instance_from_dict(doc: dict) -> Instance:
    edges = sorted(doc.get("edges", []), key=lambda e: e["id"])
    ids = [int(e["id"]) for e in edges]
    if ids != list(range(len(ids))):
        raise InvalidInstanceError(["edge ids must be unique and dense 0..|E|-1"])
    net = Network(tuple(str(n) for n in doc.get("nodes", [])), tuple((str(e["u"]), str(e["v"])) for e in edges))
    demands = tuple(Demand(str(d["src"]), str(d["dst"]), d.get("amount", 1)) for d in doc.get("demands", []))
    rates = sorted(doc["rates"], key=lambda r: r["speed"])
    cost = StepCost(tuple(r["speed"] for r in rates), tuple(r["cost"] for r in rates))
    return Instance(net, demands, cost)


def instance_to_dict(inst: Instance) -> dict:
    return {
        "nodes": list(inst.network.nodes),
        "edges": [{"id": i, "u": u, "v": v} for i, (u, v) in enumerate(inst.network.edges)],
        "demands": [{"src": d.source, "dst": d.sink, "amount": int(d.amount)} for d in inst.demands],
        "rates": [{"speed": _num(r), "cost": _num(c)} for r, c in zip(inst.cost.rates, inst.cost.costs)],
    }


def _num(x: float):
    return int(x) if float(x).is_integer() else x


def load_instance(path) -> Instance:
    with open(path) as fh:
        return instance_from_dict(json.load(fh))


def dump_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=2, sort_keys=True)


def make_network(edges: Iterable[tuple[str, str]], nodes: Iterable[str] | None = None) -> Network:
    """Convenience constructor; nodes default to first-appearance order."""
    edges = [tuple(map(str, e)) for e in edges]
    if nodes is None:
        seen: dict[str, None] = {}
        for u, v in edges:
            seen.setdefault(u)
            seen.setdefault(v)
        nodes = list(seen)
    return Network(tuple(map(str, nodes)), tuple(edges))
