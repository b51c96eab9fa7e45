"""Exception hierarchy shared by the solver modules."""


class RoutingError(Exception):
    """Base class for every error raised by rateroute."""

    code = "routing_error"


class InvalidInstanceError(RoutingError):
    code = "invalid_instance"

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class DomainError(RoutingError, ValueError):
    code = "domain_error"


class RateOverflowError(RoutingError):
    """A link load exceeds the largest available rate."""

    code = "rate_overflow"

    def __init__(self, edge, load, max_rate):
        self.edge = edge
        self.load = load
        self.max_rate = max_rate
        super().__init__(f"rate overflow on edge {edge}: load {load} > {max_rate}")


class InfeasibleError(RoutingError):
    code = "infeasible"


class ConfigurationError(RoutingError):
    code = "configuration_error"


class MalformedFlowError(RoutingError):
    code = "malformed_flow"


class OracleBudgetError(RoutingError):
    code = "oracle_budget"


class GenerationError(RoutingError):
    code = "generation_error"
