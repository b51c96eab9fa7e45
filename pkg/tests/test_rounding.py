import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rateroute import (Demand, FractionalSolution, SolverConfig, StepCost, assign_rates, decompose_flow,
                       fit_power_law, gen_random, randomized_round, sample_paths, solve_exact,
                       solve_fractional)
from rateroute.errors import InfeasibleError, MalformedFlowError, RateOverflowError
from rateroute.model import Path, PowerFit, make_network
from rateroute.rounding import PathDecomposition, decompose_all, g_cost, sample_indices


def frac(flow):
    flow = np.atleast_2d(np.asarray(flow, dtype=float))
    loads = np.abs(flow).sum(axis=0)
    return FractionalSolution(flow, loads, float(loads.sum()), 0.0, 0.0, 1, True)


def test_half_half_decomposition(diamond):
    # edges: s-a, a-t, s-b, b-t
    dec = decompose_flow(diamond, [Demand("s", "t")], frac([0.5, 0.5, 0.5, 0.5]), 0)
    assert len(dec.paths) == 2
    assert dec.weights == (0.5, 0.5)
    # ties break toward the lower edge id
    assert dec.paths[0].nodes == ("s", "a", "t")
    assert dec.paths[1].nodes == ("s", "b", "t")
    assert dec.residual == 0.0


def test_unique_path_decomposition(path_graph):
    dec = decompose_flow(path_graph, [Demand("c", "a")], frac([-1.0, -1.0]), 0)
    assert dec.paths == (Path(("c", "b", "a"), (1, 0)),)
    assert dec.weights == (1.0,)


def test_malformed_flow(diamond):
    with pytest.raises(MalformedFlowError, match="malformed fractional flow"):
        decompose_flow(diamond, [Demand("s", "t")], frac([0.5, 0.4, 0.5, 0.5]), 0)


def test_cycle_debris_dropped():
    net = make_network([("s", "t"), ("t", "u"), ("u", "s")])
    # one unit on s-t plus a small circulation s->t->u->s
    c = 1e-3
    dec = decompose_flow(net, [Demand("s", "t")], frac([1 + c, c, c]), 0)
    assert dec.weights == pytest.approx((1 + c,))
    assert dec.residual == pytest.approx(2 * c)


def _check_decomposition(net, demands, sol, eps):
    for i, d in enumerate(demands):
        dec = decompose_flow(net, demands, sol, i, eps)
        support = {e for e in range(net.n_edges) if abs(sol.flow[i, e]) >= eps}
        assert abs(dec.total_weight - d.amount) <= eps * net.n_edges
        assert dec.extractions <= net.n_edges
        assert all(w > 0 for w in dec.weights)
        for p in dec.paths:
            assert p.is_simple()
            assert p.nodes[0] == d.source and p.nodes[-1] == d.sink
            assert set(p.edges) <= support
            for (u, v), e in zip(zip(p.nodes, p.nodes[1:]), p.edges):
                a, b = net.edges[e]
                # traversal direction agrees with the sign of the flow
                assert (a, b) == (u, v) if sol.flow[i, e] > 0 else (b, a) == (u, v)
        assert dec.probabilities.sum() == pytest.approx(1.0, abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(1, 4), st.floats(1.2, 3.0))
def test_decomposition_properties(seed, max_amount, beta):
    inst = gen_random(7, 0.5, 3, max_amount=max_amount, rng_seed=seed)
    sol = solve_fractional(inst.network, inst.demands, PowerFit(1.0, beta, 1, 1, 1))
    _check_decomposition(inst.network, inst.demands, sol, 1e-6)


def test_sampling_single_path(path_graph):
    dec = decompose_all(path_graph, [Demand("a", "c")], frac([1.0, 1.0]))
    for seed in range(20):
        assert sample_paths(dec, seed)[0].nodes == ("a", "b", "c")


def test_sampling_deterministic(diamond):
    dec = decompose_all(diamond, [Demand("s", "t")] * 3, frac(np.full((3, 4), 0.5)))
    assert sample_paths(dec, 42) == sample_paths(dec, 42)
    draws = {tuple(sample_indices(dec, s)) for s in range(50)}
    assert len(draws) > 1


def test_sampling_frequency(diamond):
    dec = decompose_all(diamond, [Demand("s", "t")], frac([0.5, 0.5, 0.5, 0.5]))
    n = 10_000
    hits = sum(sample_indices(dec, s)[0] for s in range(n))
    se = np.sqrt(0.25 / n)
    assert abs(hits / n - 0.5) <= 3 * se


def test_sampling_empty():
    dec = [PathDecomposition(0, 1, (), ())]
    with pytest.raises(InfeasibleError, match="no path to sample"):
        sample_paths(dec, 0)


COST = StepCost((2, 4, 8), (1, 3, 9))


@pytest.mark.parametrize("amount, rate", [(3, 4), (2, 2), (1, 2), (8, 8)])
def test_assign_rates(path_graph, amount, rate):
    paths = [Path(("a", "b"), (0,))]
    sol = assign_rates(path_graph, paths, [Demand("a", "b", amount)], COST)
    assert sol.rates == (rate, None)
    assert sol.total_cost == COST(rate)
    assert list(sol.loads) == [amount, 0]


def test_assign_rates_overflow(path_graph):
    with pytest.raises(RateOverflowError, match="rate overflow on edge 0"):
        assign_rates(path_graph, [Path(("a", "b"), (0,))], [Demand("a", "b", 9)], COST)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=4))
def test_assign_rates_minimal(amounts):
    net = make_network([("a", "b")])
    paths = [Path(("a", "b"), (0,))] * len(amounts)
    demands = [Demand("a", "b", d) for d in amounts]
    x = sum(amounts)
    if x > 8:
        with pytest.raises(RateOverflowError):
            assign_rates(net, paths, demands, COST)
        return
    s = assign_rates(net, paths, demands, COST).rates[0]
    j = COST.rates.index(s)
    assert x <= s and (j == 0 or x > COST.rates[j - 1])


def test_round_unique_path(path_graph):
    cost = StepCost((2, 4), (1, 8))
    fit = fit_power_law(cost)
    sol = solve_fractional(path_graph, [Demand("a", "c")], fit)
    rr = randomized_round(path_graph, [Demand("a", "c")], cost, fit, sol, trials=1)
    assert rr.best.paths[0].nodes == ("a", "b", "c")
    assert rr.best.total_cost == 2.0
    assert rr.stats()["count"] == 1


def test_round_all_overflow(diamond):
    cost = StepCost((2, 4), (1, 8))
    fit = fit_power_law(cost)
    demands = [Demand("s", "t", 3)] * 3
    sol = frac(np.full((3, 4), 1.5))
    with pytest.raises(InfeasibleError, match="no feasible rounding found"):
        randomized_round(diamond, demands, cost, fit, sol, trials=20)


def test_round_statistics_and_bound():
    inst = gen_random(7, 0.5, 4, m=3, sigma_max=2.0, rng_seed=15, cost_model="power")
    fit = fit_power_law(inst.cost)
    sol = solve_fractional(inst.network, inst.demands, fit, SolverConfig(clamp_beta=True))
    rr = randomized_round(inst.network, inst.demands, inst.cost, fit, sol, trials=200, rng_seed=1)
    assert rr.feasible + rr.overflow == 200
    assert rr.min == rr.best.total_cost
    assert rr.min <= rr.mean * (1 + 1e-12) and rr.mean <= rr.max * (1 + 1e-12)
    assert len(set(rr.costs)) > 1
    assert rr.hypothesis
    assert rr.bound_violations == 0
    assert rr.max_bound_ratio <= 1
    assert rr.lambda_emp == pytest.approx(np.mean(rr.g_costs) / sol.objective)
    assert rr.mean <= fit.phi * fit.sigma * rr.lambda_emp * sol.objective * (1 + 1e-12)
    again = randomized_round(inst.network, inst.demands, inst.cost, fit, sol, trials=200, rng_seed=1)
    assert again.costs == rr.costs
    orc = solve_exact(inst.network, inst.demands, inst.cost)
    assert rr.best.total_cost >= orc.optimal_cost - 1e-9


def test_g_cost_ignores_unused():
    fit = PowerFit(2.0, 2.0, 1, 1, 1)
    assert g_cost(np.array([0, 1, 3]), fit) == pytest.approx(2 + 18)
