"""JSON Schemas for everything the CLI reads or writes."""

_num = {"type": "number"}
_path = {
    "type": "object",
    "required": ["nodes", "edges"],
    "properties": {
        "nodes": {"type": "array", "items": {"type": "string"}, "minItems": 2},
        "edges": {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 1},
    },
}

INSTANCE = {
    "type": "object",
    "required": ["nodes", "edges", "demands", "rates"],
    "properties": {
        "nodes": {"type": "array", "items": {"type": "string"}},
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "u", "v"],
                "properties": {"id": {"type": "integer", "minimum": 0}, "u": {"type": "string"},
                               "v": {"type": "string"}},
            },
        },
        "demands": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["src", "dst"],
                "properties": {"src": {"type": "string"}, "dst": {"type": "string"},
                               "amount": {"type": "integer", "minimum": 1}},
            },
        },
        "rates": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["speed", "cost"],
                "properties": {"speed": _num, "cost": _num},
            },
        },
    },
}

BOUNDS = {
    "type": "object",
    "required": ["intersects_each_step", "gap", "lower", "upper", "holds"],
    "properties": {
        "intersects_each_step": {"type": "boolean"},
        "gap": _num,
        "lower": {"type": ["number", "null"]},
        "upper": {"type": ["number", "null"]},
        "holds": {"type": ["boolean", "null"]},
        "note": {"type": "string"},
    },
}

FIT = {
    "type": "object",
    "required": ["mu", "beta", "gap", "sigma", "phi", "bounds"],
    "properties": {
        "mu": {"type": "number", "exclusiveMinimum": 0},
        "beta": _num,
        "gap": {"type": "number", "minimum": 1},
        "sigma": {"type": "number", "minimum": 1},
        "phi": _num,
        "bounds": BOUNDS,
    },
}

RELAX = {
    "type": "object",
    "required": ["flows", "loads", "objective", "duality_gap", "iterations", "converged"],
    "properties": {
        "flows": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {
                    "type": "object",
                    "required": ["edge", "from", "to", "flow"],
                    "properties": {"edge": {"type": "integer"}, "from": {"type": "string"},
                                   "to": {"type": "string"}, "flow": {"type": "number", "exclusiveMinimum": 0}},
                },
            },
        },
        "loads": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "objective": _num,
        "duality_gap": {"type": "number", "minimum": 0},
        "iterations": {"type": "integer", "minimum": 0},
        "converged": {"type": "boolean"},
        "fit": FIT,
    },
}

TRIALS = {
    "type": "object",
    "required": ["count", "feasible", "overflow", "mean", "min", "max"],
    "properties": {
        "count": {"type": "integer", "minimum": 1},
        "feasible": {"type": "integer", "minimum": 1},
        "overflow": {"type": "integer", "minimum": 0},
        "mean": _num,
        "min": _num,
        "max": _num,
    },
}

SOLVE = {
    "type": "object",
    "required": ["paths", "rates", "total_cost", "fractional_objective", "lower_bound",
                 "empirical_ratio", "trials"],
    "properties": {
        "paths": {"type": "object", "additionalProperties": _path},
        "rates": {"type": "object", "additionalProperties": _num},
        "loads": {"type": "object", "additionalProperties": {"type": "integer", "minimum": 1}},
        "total_cost": {"type": "number", "minimum": 0},
        "fractional_objective": _num,
        "duality_gap": _num,
        "lower_bound": _num,
        "empirical_ratio": _num,
        "fit": FIT,
        "trials": TRIALS,
    },
}

ORACLE = {
    "type": "object",
    "required": ["optimal_cost", "certified", "argmin_paths"],
    "properties": {
        "optimal_cost": {"type": ["number", "null"]},
        "certified": {"type": "boolean"},
        "argmin_paths": {"type": "object", "additionalProperties": _path},
    },
}

ERROR = {
    "type": "object",
    "required": ["error", "message"],
    "properties": {"error": {"type": "string"}, "message": {"type": "string"},
                   "violations": {"type": "array", "items": {"type": "string"}}},
}
