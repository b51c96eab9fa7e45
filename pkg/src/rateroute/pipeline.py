"""End-to-end fit -> relax -> round pipeline and the benchmark row builder."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .errors import OracleBudgetError, RoutingError
from .fitting import GapBoundReport, check_gap_bounds, clamp_convex, fit_power_law
from .generator import gen_random
from .model import FractionalSolution, Instance, PowerFit, validate_instance
from .oracle import OracleBudget, solve_exact
from .relaxation import SolverConfig, fractional_lower_bound, solve_fractional
from .rounding import RoundingResult, randomized_round


@dataclass
class SolveResult:
    instance: Instance
    fit: PowerFit
    bounds: GapBoundReport
    fractional: FractionalSolution
    rounding: RoundingResult
    lower_bound: float
    timings: dict

    @property
    def best(self):
        return self.rounding.best

    @property
    def empirical_ratio(self) -> float:
        return self.best.total_cost / self.lower_bound

    def to_json(self) -> dict:
        best = self.best
        return {
            "paths": {str(i): p.to_json() for i, p in enumerate(best.paths)},
            "rates": {str(e): r for e, r in enumerate(best.rates) if r is not None},
            "loads": {str(e): int(x) for e, x in enumerate(best.loads.tolist()) if x > 0},
            "total_cost": best.total_cost,
            "fractional_objective": self.fractional.objective,
            "duality_gap": self.fractional.duality_gap,
            "lower_bound": self.lower_bound,
            "empirical_ratio": self.empirical_ratio,
            "fit": fit_json(self.fit, self.bounds),
            "trials": self.rounding.stats(),
        }


def fit_json(fit: PowerFit, bounds: GapBoundReport) -> dict:
    return {
        "mu": fit.mu,
        "beta": fit.beta,
        "gap": fit.gap,
        "sigma": fit.sigma,
        "phi": fit.phi,
        "bounds": bounds.to_json(),
    }


def fit_for_relaxation(inst: Instance, clamp_beta: bool = False) -> PowerFit:
    fit = fit_power_law(inst.cost)
    if clamp_beta:
        fit = clamp_convex(fit, inst.cost)
    return fit


def solve(inst: Instance, cfg: SolverConfig | None = None, trials: int = 100, rng_seed=0) -> SolveResult:
    cfg = cfg or SolverConfig()
    validate_instance(inst.network, inst.demands, inst.cost).raise_if_invalid()
    t0 = time.perf_counter()
    fit = fit_for_relaxation(inst, cfg.clamp_beta)
    bounds = check_gap_bounds(inst.cost, fit)
    t1 = time.perf_counter()
    frac = solve_fractional(inst.network, inst.demands, fit, cfg)
    t2 = time.perf_counter()
    rr = randomized_round(inst.network, inst.demands, inst.cost, fit, frac, trials, rng_seed,
                          cfg.epsilon_flow, hypothesis=bounds.intersects_each_step)
    t3 = time.perf_counter()
    lb = fractional_lower_bound(frac, inst.cost, fit)
    timings = {"fit": t1 - t0, "relax": t2 - t1, "round": t3 - t2}
    return SolveResult(inst, fit, bounds, frac, rr, lb, timings)


BENCH_VERSION = 1
BENCH_COLUMNS = [
    "index", "instance_seed", "status", "nodes", "edges", "demands", "certified",
    "oracle_cost", "best_cost", "mean_trial_cost", "lower_bound", "fractional_objective",
    "empirical_ratio", "ratio_to_lower_bound", "gap", "sigma", "phi", "beta",
    "duality_gap", "iterations", "overflow_trials", "lambda_emp",
    "t_fit", "t_relax", "t_round", "t_oracle",
]
RUNTIME_COLUMNS = [c for c in BENCH_COLUMNS if c.startswith("t_")]


@dataclass(frozen=True)
class BenchParams:
    count: int = 20
    seed: int = 0
    nodes: int = 7
    edge_prob: float = 0.4
    demands: int = 3
    m: int = 3
    sigma_max: float = 2.0
    max_amount: int = 1
    cost_model: str = "ratio"
    trials: int = 100
    tol: float = 1e-4
    clamp_beta: bool = True
    max_combinations: int = 10**6


def instance_seed(base_seed: int, index: int) -> int:
    return base_seed * 1_000_003 + index


def bench_row(params: BenchParams, index: int) -> dict:
    seed = instance_seed(params.seed, index)
    inst = gen_random(params.nodes, params.edge_prob, params.demands, params.m, params.sigma_max,
                      params.max_amount, seed, params.cost_model)
    row = {c: "" for c in BENCH_COLUMNS}
    row.update(index=index, instance_seed=seed, nodes=inst.network.n_nodes,
               edges=inst.network.n_edges, demands=len(inst.demands))
    try:
        res = solve(inst, SolverConfig(rel_gap_tol=params.tol, clamp_beta=params.clamp_beta),
                    params.trials, seed)
    except RoutingError as exc:
        row["status"] = exc.code
        return row
    rr = res.rounding
    row.update(
        status="ok",
        best_cost=res.best.total_cost,
        mean_trial_cost=rr.mean,
        lower_bound=res.lower_bound,
        fractional_objective=res.fractional.objective,
        ratio_to_lower_bound=res.empirical_ratio,
        gap=res.fit.gap,
        sigma=res.fit.sigma,
        phi=res.fit.phi,
        beta=res.fit.beta,
        duality_gap=res.fractional.duality_gap,
        iterations=res.fractional.iterations,
        overflow_trials=rr.overflow,
        lambda_emp=rr.lambda_emp,
        t_fit=res.timings["fit"],
        t_relax=res.timings["relax"],
        t_round=res.timings["round"],
    )
    t0 = time.perf_counter()
    try:
        orc = solve_exact(inst.network, inst.demands, inst.cost,
                          OracleBudget(max_combinations=params.max_combinations))
    except OracleBudgetError:
        row["certified"] = False
    else:
        row["certified"] = orc.certified
        row["oracle_cost"] = orc.optimal_cost
        if orc.optimal_cost > 0:
            row["empirical_ratio"] = res.best.total_cost / orc.optimal_cost
    row["t_oracle"] = time.perf_counter() - t0
    return row
