"""Command-line interface: ``rateroute {fit,relax,solve,oracle,gen,bench}``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from functools import partial

from .errors import InvalidInstanceError, RoutingError
from .fitting import check_gap_bounds, fit_power_law
from .generator import COST_MODELS, gen_edp_gadget, gen_random
from .model import Instance, StepCost, dump_instance, instance_from_dict, make_network, validate_instance
from .oracle import OracleBudget, solve_exact
from .pipeline import (BENCH_COLUMNS, BENCH_VERSION, BenchParams, bench_row, fit_for_relaxation,
                       fit_json, solve)
from .relaxation import SolverConfig, solve_fractional


def _read_json(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path) as fh:
        return json.load(fh)


def _read_instance(path: str) -> Instance:
    try:
        return instance_from_dict(_read_json(path))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, RoutingError):
            raise
        raise InvalidInstanceError([f"malformed instance JSON: {exc}"]) from exc


def _emit(args, text: str):
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(args, doc):
    _emit(args, json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n")


def _config(args) -> SolverConfig:
    return SolverConfig(max_iterations=args.max_iter, rel_gap_tol=args.tol, step_rule=args.step_rule,
                        epsilon_flow=args.epsilon, clamp_beta=args.clamp_beta)


def cmd_fit(args):
    doc = _read_json(args.instance)
    try:
        rates = sorted(doc["rates"], key=lambda r: r["speed"])
        cost = StepCost(tuple(r["speed"] for r in rates), tuple(r["cost"] for r in rates))
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInstanceError([f"malformed rate table: {exc}"]) from exc
    fit = fit_power_law(cost)
    _emit_json(args, fit_json(fit, check_gap_bounds(cost, fit)))


def cmd_relax(args):
    inst = _read_instance(args.instance)
    cfg = _config(args)
    validate_instance(inst.network, inst.demands, inst.cost).raise_if_invalid()
    fit = fit_for_relaxation(inst, cfg.clamp_beta)
    sol = solve_fractional(inst.network, inst.demands, fit, cfg)
    net = inst.network
    flows = {}
    for i in range(len(inst.demands)):
        items = []
        for e, f in enumerate(sol.flow[i].tolist()):
            if abs(f) < cfg.epsilon_flow:
                continue
            u, v = net.edges[e]
            a, b = (u, v) if f > 0 else (v, u)
            items.append({"edge": e, "from": a, "to": b, "flow": abs(f)})
        flows[str(i)] = items
    _emit_json(args, {
        "flows": flows,
        "loads": sol.loads.tolist(),
        "objective": sol.objective,
        "duality_gap": sol.duality_gap,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "fit": fit_json(fit, check_gap_bounds(inst.cost, fit)),
    })


def cmd_solve(args):
    inst = _read_instance(args.instance)
    res = solve(inst, _config(args), args.trials, args.seed)
    _emit_json(args, res.to_json())


def cmd_oracle(args):
    inst = _read_instance(args.instance)
    validate_instance(inst.network, inst.demands, inst.cost).raise_if_invalid()
    budget = OracleBudget(args.max_paths, args.max_combinations)
    res = solve_exact(inst.network, inst.demands, inst.cost, budget)
    doc = res.to_json()
    if not math.isfinite(doc["optimal_cost"]):
        doc["optimal_cost"] = None
    _emit_json(args, doc)


def cmd_gen(args):
    if args.edp:
        doc = _read_json(args.edp)
        net = make_network([(e["u"], e["v"]) for e in sorted(doc["edges"], key=lambda e: e["id"])],
                           doc.get("nodes"))
        pairs = [(p[0], p[1]) for p in doc["pairs"]]
        inst = gen_edp_gadget(net, pairs, args.rho, args.r1)
    else:
        inst = gen_random(args.nodes, args.edge_prob, args.demands, args.m, args.sigma_max,
                          args.max_amount, args.seed, args.cost_model)
    _emit(args, dump_instance(inst) + "\n")


def bench_csv(params: BenchParams, workers: int = 1) -> str:
    job = partial(bench_row, params)
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(job, range(params.count)))
    else:
        rows = [job(i) for i in range(params.count)]
    buf = io.StringIO()
    buf.write(f"# rateroute-bench v{BENCH_VERSION}\n")
    w = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def cmd_bench(args):
    params = BenchParams(count=args.count, seed=args.seed, nodes=args.nodes, edge_prob=args.edge_prob,
                         demands=args.demands, m=args.m, sigma_max=args.sigma_max,
                         max_amount=args.max_amount, cost_model=args.cost_model, trials=args.trials,
                         tol=args.tol, clamp_beta=args.clamp_beta,
                         max_combinations=args.max_combinations)
    _emit(args, bench_csv(params, args.workers))


def _common(p: argparse.ArgumentParser, trials_default=100):
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--tol", type=float, default=1e-4, help="relative duality-gap tolerance")
    p.add_argument("--trials", type=int, default=trials_default, help="rounding trials")
    p.add_argument("--out", default=None, help="output file (default: stdout)")


def _solver_flags(p):
    p.add_argument("--max-iter", type=int, default=5000)
    p.add_argument("--step-rule", choices=["line_search", "diminishing"], default="line_search")
    p.add_argument("--epsilon", type=float, default=1e-6, help="flow support threshold")
    p.add_argument("--clamp-beta", action="store_true", help="use beta = 1 when the fit is concave")


def _gen_flags(p):
    p.add_argument("--nodes", type=int, default=7)
    p.add_argument("--edge-prob", type=float, default=0.4)
    p.add_argument("--demands", type=int, default=3)
    p.add_argument("--m", type=int, default=3, help="number of rate states")
    p.add_argument("--sigma-max", type=float, default=2.0, help="cap on adjacent cost ratio")
    p.add_argument("--max-amount", type=int, default=1)
    p.add_argument("--cost-model", choices=COST_MODELS, default="ratio")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rateroute", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit the power law to an instance's rate table")
    p.add_argument("instance")
    _common(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("relax", help="solve the fractional relaxation")
    p.add_argument("instance")
    _common(p)
    _solver_flags(p)
    p.set_defaults(func=cmd_relax)

    p = sub.add_parser("solve", help="fit, relax and round")
    p.add_argument("instance")
    _common(p)
    _solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("oracle", help="exact optimum by enumeration (small instances)")
    p.add_argument("instance")
    _common(p)
    p.add_argument("--max-paths", type=int, default=64)
    p.add_argument("--max-combinations", type=int, default=10**6)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="generate an instance")
    _common(p)
    _gen_flags(p)
    p.add_argument("--edp", metavar="GRAPH_JSON",
                   help='build the edge-disjoint-paths gadget from {"edges": [...], "pairs": [[s, t], ...]}')
    p.add_argument("--rho", type=float, default=1.0)
    p.add_argument("--r1", type=int, default=1)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run generated instances through solve and the oracle, emit CSV")
    _common(p, trials_default=200)
    _gen_flags(p)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-combinations", type=int, default=10**6)
    p.add_argument("--no-clamp-beta", dest="clamp_beta", action="store_false")
    p.set_defaults(func=cmd_bench, clamp_beta=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except RoutingError as exc:
        err = {"error": exc.code, "message": str(exc)}
        if isinstance(exc, InvalidInstanceError):
            err["violations"] = exc.violations
        sys.stderr.write(json.dumps(err) + "\n")
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(json.dumps({"error": "io_error", "message": str(exc)}) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
