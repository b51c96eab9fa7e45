"""Instance generators: random benchmark instances and the two-rate
edge-disjoint-paths gadget."""

from __future__ import annotations

import itertools
import random
from typing import Sequence

from .errors import GenerationError
from .model import Demand, Instance, Network, StepCost

GADGET_ETA = 0.01
COST_MODELS = ("ratio", "power")


def random_step_cost(rng: random.Random, m: int, max_rate: int, sigma_max: float,
                     model: str = "ratio") -> StepCost:
    """Random rate table with ``m`` integer rates ending at ``max_rate``.

    ``model="ratio"`` draws each adjacent cost ratio uniformly from
    ``[1, sigma_max]``. ``model="power"`` follows a noisy power law in the rate
    and caps each adjacent ratio at ``sigma_max``.
    """
    if m < 1:
        raise GenerationError("need at least one rate state")
    if max_rate < m:
        raise GenerationError("max_rate must be at least m")
    if sigma_max < 1:
        raise GenerationError("sigma_max must be at least 1")
    if model not in COST_MODELS:
        raise GenerationError(f"unknown cost model {model!r}")
    rates = sorted(rng.sample(range(1, max_rate), m - 1)) + [max_rate]
    base = round(rng.uniform(1.0, 10.0), 6)
    costs = [base]
    if model == "ratio":
        for _ in range(m - 1):
            costs.append(costs[-1] * rng.uniform(1.0, sigma_max))
    else:
        beta = rng.uniform(1.0, 3.0)
        for a, b in zip(rates, rates[1:]):
            step = (b / a) ** beta * rng.uniform(0.8, 1.25)
            costs.append(costs[-1] * min(max(step, 1.0), sigma_max))
    # rounding must not push a ratio past the cap or break monotonicity
    out = [costs[0]]
    for c in costs[1:]:
        r = round(c, 6)
        while r / out[-1] > sigma_max:
            r = round(r - 1e-6, 6)
        out.append(max(r, out[-1]))
    return StepCost(tuple(rates), tuple(out))


def gen_random(nodes: int, edge_prob: float, demand_count: int, m: int = 3,
               sigma_max: float = 2.0, max_amount: int = 1, rng_seed=0,
               cost_model: str = "ratio", max_retries: int = 200) -> Instance:
    """G(n, p) instance with demands over distinct connected node pairs.

    The largest rate is at least ``demand_count * max_amount`` so that any
    routing fits.
    """
    if nodes < 2 or demand_count < 1 or max_amount < 1:
        raise GenerationError("nodes >= 2, demand_count >= 1 and max_amount >= 1 required")
    if not 0 < edge_prob < 1:
        raise GenerationError("edge_prob must lie in (0, 1)")
    rng = random.Random(rng_seed)
    names = [f"n{i}" for i in range(nodes)]
    for _ in range(max_retries):
        edges = [(names[u], names[v]) for u, v in itertools.combinations(range(nodes), 2)
                 if rng.random() < edge_prob]
        net = Network(tuple(names), tuple(edges))
        label = net.components()
        pairs = [(u, v) for u, v in itertools.permutations(range(nodes), 2) if label[u] == label[v]]
        if not pairs:
            continue
        if len(pairs) >= demand_count:
            chosen = rng.sample(pairs, demand_count)
        else:
            chosen = [rng.choice(pairs) for _ in range(demand_count)]
        demands = tuple(Demand(names[u], names[v], rng.randint(1, max_amount)) for u, v in chosen)
        top = max(demand_count * max_amount, m, 2)
        cost = random_step_cost(rng, m, top, sigma_max, cost_model)
        return Instance(net, demands, cost)
    raise GenerationError("could not generate connected instance")


def gen_edp_gadget(net: Network, pairs: Sequence[tuple[str, str]], rho: float = 1.0,
                   r1: int = 1, base_cost: float = 1.0) -> Instance:
    """Two-rate instance whose optimum is at most ``rho * |E| * f(R1)`` exactly
    when the pairs admit edge-disjoint paths.

    ``R2 = k * R1`` for ``k`` pairs, every demand is ``R1`` and
    ``f(R2) = rho * |E| * f(R1) * (1 + eta)``.
    """
    if not pairs:
        raise GenerationError("gadget needs at least one pair")
    if rho < 1:
        raise GenerationError("rho must be at least 1")
    if int(r1) != r1 or r1 < 1:
        raise GenerationError("R1 must be a positive integer in gadget mode")
    k, w = len(pairs), net.n_edges
    r2 = max(k, 2) * r1
    high = rho * w * base_cost * (1 + GADGET_ETA)
    cost = StepCost((r1, r2), (base_cost, high))
    demands = tuple(Demand(s, t, int(r1)) for s, t in pairs)
    return Instance(net, demands, cost)


def gadget_threshold(inst: Instance, rho: float = 1.0) -> float:
    return rho * inst.network.n_edges * inst.cost.costs[0]
