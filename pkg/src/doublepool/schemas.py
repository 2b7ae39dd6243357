"""JSON Schemas for the documents written by ``doublepool --format json``."""

_number_or_null = {"type": ["number", "null"]}

METADATA = {
    "type": "object",
    "required": ["tool", "version", "command", "argv", "command_line", "config"],
    "properties": {
        "tool": {"const": "doublepool"},
        "version": {"type": "string"},
        "command": {"enum": ["optimize", "sweep", "simulate", "figure-data"]},
        "argv": {"type": "array", "items": {"type": "string"}},
        "command_line": {"type": "string"},
        "config": {"type": "object"},
    },
}

_PLAN_ROW = {
    "type": "object",
    "required": [
        "p", "k", "s_integer", "s_continuous", "expected_cost", "baseline_cost",
        "beneficial", "cap_binding", "savings_vs_k1_percent", "savings_vs_individual_percent",
    ],
    "properties": {
        "p": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "k": {"type": "integer", "minimum": 1},
        "s_integer": {"type": "integer", "minimum": 2},
        "s_continuous": _number_or_null,
        "expected_cost": {"type": "number", "exclusiveMinimum": 0},
        "baseline_cost": {"const": 1.0},
        "beneficial": {"type": "boolean"},
        "cap_binding": {"type": "boolean"},
        "savings_vs_k1_percent": {"type": "number"},
        "savings_vs_individual_percent": {"type": "number"},
    },
}

_SWEEP_ROW = {
    "type": "object",
    "required": ["p", "s1_opt", "s2_opt", "cost_1", "cost_2", "savings_percent"],
    "properties": {
        "p": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "savings_percent": {"type": "number"},
    },
    "patternProperties": {
        "^s[0-9]+_opt$": {"type": "integer", "minimum": 2},
        "^cost_[0-9]+$": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
}

_FIGURE_ROW = {
    "type": "object",
    "required": ["p"],
    "properties": {
        "p": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "s1_opt": {"type": "integer", "minimum": 2},
        "s2_opt": {"type": "integer", "minimum": 2},
        "cost_1": {"type": "number"},
        "cost_2": {"type": "number"},
        "savings_percent": {"type": "number"},
    },
    "additionalProperties": False,
    "minProperties": 2,
}

_SIM_ROW = {
    "type": "object",
    "required": [
        "n_patients", "k", "s", "trials", "mean_total_tests", "mean_tests_per_patient",
        "std_error", "analytic_cost", "empirical_sensitivity", "total_positives", "total_detected",
    ],
    "properties": {
        "n_patients": {"type": "integer", "minimum": 1},
        "k": {"type": "integer", "minimum": 1},
        "s": {"type": "integer", "minimum": 1},
        "trials": {"type": "integer", "minimum": 1},
        "mean_total_tests": {"type": "number", "minimum": 0},
        "mean_tests_per_patient": {"type": "number", "minimum": 0},
        "std_error": _number_or_null,
        "analytic_cost": _number_or_null,
        "empirical_sensitivity": {"type": "number", "minimum": 0, "maximum": 1},
        "total_positives": {"type": "integer", "minimum": 0},
        "total_detected": {"type": "integer", "minimum": 0},
    },
}


def _envelope(row_schema, command):
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "required": ["metadata", "columns", "rows"],
        "properties": {
            "metadata": {
                "allOf": [METADATA, {"properties": {"command": {"const": command}}}]
            },
            "columns": {"type": "array", "items": {"type": "string"}, "minItems": 1},
            "rows": {"type": "array", "items": row_schema},
        },
        "additionalProperties": False,
    }


SCHEMAS = {
    "optimize": _envelope(_PLAN_ROW, "optimize"),
    "sweep": _envelope(_SWEEP_ROW, "sweep"),
    "simulate": _envelope(_SIM_ROW, "simulate"),
    "figure-data": _envelope(_FIGURE_ROW, "figure-data"),
}
