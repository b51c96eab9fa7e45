import numpy as np
import pytest

from rateroute import Demand, PowerFit, SolverConfig, StepCost, fit_power_law, gen_random, solve_exact
from rateroute.errors import ConfigurationError, InfeasibleError
from rateroute.model import make_network
from rateroute.relaxation import conservation_residual, fractional_lower_bound, solve_fractional


def power(mu, beta):
    return PowerFit(mu, beta, 1.0, 1.0, 1.0)


def test_unique_path(path_graph):
    fit = power(1.7, 2.0)
    sol = solve_fractional(path_graph, [Demand("a", "c")], fit)
    assert sol.objective == pytest.approx(2 * 1.7, rel=1e-12)
    assert np.allclose(np.abs(sol.flow[0]), [1, 1])
    assert sol.converged


def test_even_split_on_parallel_paths(diamond):
    fit = power(1.0, 2.0)
    sol = solve_fractional(diamond, [Demand("s", "t", 2)], fit, SolverConfig(rel_gap_tol=1e-8))
    assert np.allclose(sol.loads, 1.0, atol=1e-6)
    assert sol.objective == pytest.approx(4.0, rel=1e-8)


@pytest.mark.parametrize("step_rule, pairwise", [("line_search", True), ("line_search", False),
                                                 ("diminishing", False)])
def test_step_rules_agree(step_rule, pairwise):
    inst = gen_random(7, 0.5, 3, m=3, sigma_max=4.0, rng_seed=11, cost_model="power")
    fit = power(1.0, 1.8)
    cfg = SolverConfig(rel_gap_tol=1e-3, step_rule=step_rule, pairwise=pairwise, max_iterations=20000)
    ref = solve_fractional(inst.network, inst.demands, fit, SolverConfig(rel_gap_tol=1e-7))
    sol = solve_fractional(inst.network, inst.demands, fit, cfg)
    assert sol.converged
    assert ref.objective <= sol.objective * (1 + 1e-9)
    assert sol.objective <= ref.objective * (1 + 1e-3)


def test_line_search_objective_non_increasing():
    inst = gen_random(8, 0.5, 4, rng_seed=3)
    cfg = SolverConfig(rel_gap_tol=1e-6, pairwise=False)
    sol = solve_fractional(inst.network, inst.demands, power(1.0, 2.0), cfg)
    h = np.array(sol.history)
    assert np.all(np.diff(h) <= 1e-12 * h[:-1])


@pytest.mark.parametrize("seed", range(10))
def test_conservation_and_certificate(seed):
    inst = gen_random(7, 0.4, 4, max_amount=3, rng_seed=seed)
    fit = power(0.5, 1.5)
    sol = solve_fractional(inst.network, inst.demands, fit)
    assert np.max(conservation_residual(inst.network, inst.demands, sol)) <= 1e-8
    assert np.allclose(sol.loads, np.abs(sol.flow).sum(axis=0))
    assert sol.lower_objective <= sol.objective
    assert sol.duality_gap <= 1e-4
    # reported gap bounds the suboptimality against the oracle's g optimum
    orc = solve_exact(inst.network, inst.demands, inst.cost, fit=fit)
    assert sol.objective <= orc.optimal_cost * (1 + 1e-4)
    assert sol.lower_objective <= orc.optimal_cost * (1 + 1e-12)


def test_linear_objective_is_min_hop():
    # beta = 1: the optimum routes every demand on a shortest hop path
    inst = gen_random(8, 0.4, 4, rng_seed=5)
    sol = solve_fractional(inst.network, inst.demands, power(2.0, 1.0))
    orc = solve_exact(inst.network, inst.demands, inst.cost, fit=power(2.0, 1.0))
    assert sol.objective == pytest.approx(orc.optimal_cost, rel=1e-9)


def test_non_convex_rejected(path_graph):
    with pytest.raises(ConfigurationError, match="non-convex objective"):
        solve_fractional(path_graph, [Demand("a", "c")], power(1.0, 0.5))
    sol = solve_fractional(path_graph, [Demand("a", "c")], power(1.0, 0.5), SolverConfig(clamp_beta=True))
    assert sol.objective == pytest.approx(2.0)


def test_disconnected_rejected():
    net = make_network([("a", "b"), ("c", "d")])
    with pytest.raises(InfeasibleError, match="infeasible: no path"):
        solve_fractional(net, [Demand("a", "d")], power(1.0, 2.0))


@pytest.mark.parametrize("kwargs", [dict(max_iterations=0), dict(rel_gap_tol=0), dict(rel_gap_tol=1),
                                    dict(step_rule="newton"), dict(epsilon_flow=0.5)])
def test_config_validation(kwargs):
    with pytest.raises(ConfigurationError):
        SolverConfig(**kwargs)


def test_max_iterations_flag(caplog):
    inst = gen_random(8, 0.6, 4, rng_seed=2)
    sol = solve_fractional(inst.network, inst.demands, power(1.0, 3.0),
                           SolverConfig(max_iterations=1, rel_gap_tol=1e-9, pairwise=False))
    assert not sol.converged
    assert sol.iterations == 1


def test_lower_bound_exact_fit(path_graph):
    cost = StepCost((4,), (2,))
    fit = fit_power_law(cost)
    sol = solve_fractional(path_graph, [Demand("a", "c")], fit, SolverConfig(clamp_beta=True))
    assert fractional_lower_bound(sol, cost, fit) == pytest.approx(sol.objective)


@pytest.mark.parametrize("seed", range(6))
def test_lower_bound_below_oracle_and_monotone(seed):
    inst = gen_random(7, 0.5, 4, m=3, sigma_max=4.0, rng_seed=100 + seed, cost_model="power")
    fit = fit_power_law(inst.cost)
    cfg = SolverConfig(clamp_beta=True, rel_gap_tol=1e-6)
    bounds = []
    for k in range(1, len(inst.demands) + 1):
        sol = solve_fractional(inst.network, inst.demands[:k], fit, cfg)
        bounds.append(fractional_lower_bound(sol, inst.cost, fit))
    orc = solve_exact(inst.network, inst.demands, inst.cost)
    assert bounds[-1] <= orc.optimal_cost * (1 + 1e-6)
    assert all(b2 >= b1 * (1 - 1e-5) for b1, b2 in zip(bounds, bounds[1:]))
