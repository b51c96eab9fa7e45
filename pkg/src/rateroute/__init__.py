"""Energy-efficient unsplittable routing over links with discrete rate states.

The pipeline fits a power law to the step cost, solves the convex fractional
relaxation, and rounds it to one path per demand. An exhaustive oracle gives
exact optima on small instances.
"""

from .errors import RoutingError
from .fitting import check_gap_bounds, fit_power_law, measure_gap
from .generator import gen_edp_gadget, gen_random
from .kernels import BACKEND
from .model import (Demand, FractionalSolution, Instance, IntegralSolution, Network, Path, PowerFit,
                    StepCost, load_instance, step_cost_eval, validate_instance)
from .oracle import OracleBudget, enumerate_paths, solve_exact
from .pipeline import solve
from .relaxation import SolverConfig, fractional_lower_bound, solve_fractional
from .rounding import assign_rates, decompose_flow, randomized_round, sample_paths

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "Demand", "FractionalSolution", "Instance", "IntegralSolution", "Network",
    "OracleBudget", "Path", "PowerFit", "RoutingError", "SolverConfig", "StepCost",
    "assign_rates", "check_gap_bounds", "decompose_flow", "enumerate_paths", "fit_power_law",
    "fractional_lower_bound", "gen_edp_gadget", "gen_random", "load_instance", "measure_gap",
    "randomized_round", "sample_paths", "solve", "solve_exact", "solve_fractional",
    "step_cost_eval", "validate_instance",
]
