"""Fit a power law ``g(x) = mu * x**beta`` to a step cost function.

The fit minimizes the squared log-space difference between the step
function and the power law, integrated over ``log x`` on ``[0, log R_m]``.
Because both sides are piecewise polynomial in ``w = log x`` the objective
and its normal equations have closed forms; no quadrature is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidInstanceError, RoutingError
from .model import PowerFit, StepCost


@dataclass(frozen=True)
class LogBreakpoints:
    """``v[i] = log y_i`` for each step and ``w = (0, log R_1, ..., log R_m)``."""

    v: np.ndarray
    w: np.ndarray

    @classmethod
    def from_cost(cls, cost: StepCost) -> "LogBreakpoints":
        v = np.log(np.asarray(cost.costs, dtype=float))
        w = np.concatenate([[0.0], np.log(np.asarray(cost.rates, dtype=float))])
        return cls(v, w)


def normal_equations(bp: LogBreakpoints) -> tuple[np.ndarray, np.ndarray]:
    """Matrix and right-hand side of the 2x2 system in ``(log mu, beta)``."""
    W = bp.w[-1]
    lo, hi = bp.w[:-1], bp.w[1:]
    A = np.array([[W, W**2 / 2.0], [W**2 / 2.0, W**3 / 3.0]])
    b = np.array([np.sum(bp.v * (hi - lo)), np.sum(bp.v * (hi**2 - lo**2)) / 2.0])
    return A, b


def log_objective(cost: StepCost, log_mu: float, beta: float) -> float:
    """Closed-form value of the integrated squared log-space error."""
    bp = LogBreakpoints.from_cost(cost)
    lo, hi = bp.w[:-1], bp.w[1:]
    c = bp.v - log_mu
    # integral of (c - beta*w)^2 over [lo, hi]
    terms = c**2 * (hi - lo) - c * beta * (hi**2 - lo**2) + beta**2 * (hi**3 - lo**3) / 3.0
    return float(np.sum(terms))


def max_step_ratio(cost: StepCost) -> float:
    """Largest ratio between the costs of adjacent rate states; 1 for a single state."""
    y = cost.costs
    return max((b / a for a, b in zip(y, y[1:])), default=1.0)


def fit_power_law(cost: StepCost) -> PowerFit:
    problems = cost.problems()
    if problems:
        raise InvalidInstanceError(problems)
    if cost.max_rate <= 1:
        raise DomainError("degenerate domain: largest rate must exceed 1")
    A, b = normal_equations(LogBreakpoints.from_cost(cost))
    if not np.linalg.det(A) > 0:
        raise RoutingError("singular normal equations")
    log_mu, beta = np.linalg.solve(A, b)
    mu = math.exp(log_mu)
    sigma = max_step_ratio(cost)
    phi = max(sigma, cost.costs[0] / mu)
    gap = measure_gap(cost, mu, float(beta))
    return PowerFit(mu=mu, beta=float(beta), gap=gap, sigma=sigma, phi=phi)


def _ratio(a, b):
    return np.maximum(a / b, b / a)


def gap_candidates(cost: StepCost, mu: float, beta: float) -> list[tuple[float, float]]:
    """``(x, f)`` pairs at which the interpolation error can peak.

    On each step ``f`` is constant and ``g`` monotone, so the supremum of the
    ratio sits at a step end. At every interior breakpoint both one-sided
    values of ``f`` are listed.
    """
    r, y = cost.rates, cost.costs
    pts = [(1.0, y[0])]
    for i in range(cost.m):
        pts.append((r[i], y[i]))
        if i + 1 < cost.m:
            pts.append((r[i], y[i + 1]))
    return pts


def measure_gap(cost: StepCost, mu: float | PowerFit, beta: float | None = None,
                samples_per_step: int | None = None) -> float:
    """Interpolation error ``max over x in [1, R_m] of max(f/g, g/f)``.

    ``samples_per_step`` additionally samples every step densely and checks
    that no sample exceeds the endpoint value.
    """
    if isinstance(mu, PowerFit):
        mu, beta = mu.mu, mu.beta
    pts = gap_candidates(cost, mu, beta)
    xs = np.array([p[0] for p in pts])
    fs = np.array([p[1] for p in pts])
    gap = float(np.max(_ratio(fs, mu * xs**beta)))
    if samples_per_step is not None:
        if samples_per_step < 2:
            raise ValueError("samples_per_step must be at least 2")
        sampled = sampled_gap(cost, mu, beta, samples_per_step)
        if sampled > gap * (1 + 1e-9):
            raise RoutingError(f"sampled gap {sampled} exceeds endpoint gap {gap}")
    return gap


def sampled_gap(cost: StepCost, mu: float, beta: float, samples_per_step: int) -> float:
    lo = 1.0
    best = 1.0
    for r, y in zip(cost.rates, cost.costs):
        xs = np.linspace(lo, r, samples_per_step)
        best = max(best, float(np.max(_ratio(y, mu * xs**beta))))
        lo = r
    return best


def intersects_each_step(cost: StepCost, fit: PowerFit, rtol: float = 1e-12) -> bool:
    """Whether ``g`` takes the value of ``f`` somewhere on every step's closure."""
    lo = 1.0
    for r, y in zip(cost.rates, cost.costs):
        a, b = sorted((fit(lo), fit(r)))
        if not (a * (1 - rtol) <= y <= b * (1 + rtol)):
            return False
        lo = r
    return True


@dataclass(frozen=True)
class GapBoundReport:
    intersects_each_step: bool
    gap: float
    lower: float | None
    upper: float | None
    holds: bool | None
    note: str = ""

    def to_json(self) -> dict:
        return {
            "intersects_each_step": self.intersects_each_step,
            "gap": self.gap,
            "lower": self.lower,
            "upper": self.upper,
            "holds": self.holds,
            "note": self.note,
        }


def check_gap_bounds(cost: StepCost, fit: PowerFit, rtol: float = 1e-12) -> GapBoundReport:
    """Compare the measured gap with ``[2g/(g+1), max(g, f(1)/mu)]``, where
    ``g`` is the measured maximum adjacent step ratio.

    The interval is only asserted when the power law meets every step; with a
    single state there is no adjacent pair and the check is skipped.
    """
    meets = intersects_each_step(cost, fit)
    if cost.m < 2:
        return GapBoundReport(meets, fit.gap, None, None, None, "single rate state")
    gamma = fit.sigma
    lower = 2 * gamma / (gamma + 1)
    upper = fit.phi
    if not meets:
        return GapBoundReport(meets, fit.gap, lower, upper, None, "power law misses a step")
    holds = lower * (1 - rtol) <= fit.gap <= upper * (1 + rtol)
    return GapBoundReport(meets, fit.gap, lower, upper, bool(holds))


def clamp_convex(fit: PowerFit, cost: StepCost) -> PowerFit:
    """Force ``beta := 1`` and recompute the error statistics against ``cost``.

    ``mu`` keeps its fitted value.
    """
    if fit.beta >= 1:
        return fit
    gap = measure_gap(cost, fit.mu, 1.0)
    return PowerFit(mu=fit.mu, beta=1.0, gap=gap, sigma=fit.sigma, phi=fit.phi)
