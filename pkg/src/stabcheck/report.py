"""JSON report and Betti-table CSV serialization."""

from __future__ import annotations

import csv
import io
import json

import jsonschema
import numpy as np

from .checker import Condition, ConditionResult, Outcome, Report, Verdict

SCHEMA_VERSION = 1

_GROUP_TABLE = {
    "type": "object",
    "properties": {
        "betti": {"type": "object", "patternProperties": {"^H[0-9]+$": {"type": "integer", "minimum": 0}},
                  "additionalProperties": False},
        "torsion": {"type": "object", "patternProperties": {
            "^H[0-9]+$": {"type": "array", "items": {"type": "integer", "minimum": 2}}},
            "additionalProperties": False},
    },
    "required": ["betti", "torsion"],
}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "system", "params", "resolutions", "induced_maps",
                 "conditions", "verdict", "caveats", "aborted"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "system": {
            "type": "object",
            "required": ["name", "n", "m", "components"],
            "properties": {
                "name": {"type": "string"},
                "n": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 0},
                "components": {"type": "array", "items": {"type": "string"}},
            },
        },
        "params": {"type": "object", "required": ["epsilon", "resolutions", "seed"]},
        "resolutions": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["resolution", "top_cubes", "total_cubes"],
                "properties": {
                    "resolution": {"type": "integer"},
                    "top_cubes": {"type": "integer"},
                    "total_cubes": {"type": "integer"},
                    "homology": _GROUP_TABLE,
                    "cohomology": _GROUP_TABLE,
                    "generator_sizes": {"type": "object"},
                    "error": {"type": ["string", "null"]},
                },
            },
        },
        "induced_maps": {
            "type": "object",
            "required": ["probes", "generators", "witnessed_generator"],
            "properties": {
                "probes": {"type": "array", "items": {"type": "object"}},
                "generators": {"type": "array", "items": {"type": "object"}},
                "witnessed_generator": {"type": "boolean"},
            },
        },
        "conditions": {
            "type": "array",
            "minItems": 3,
            "maxItems": 3,
            "items": {
                "type": "object",
                "required": ["condition", "outcome", "stabilized", "evidence"],
                "additionalProperties": False,
                "properties": {
                    "condition": {"enum": [c.value for c in Condition]},
                    "outcome": {"enum": [o.value for o in Outcome]},
                    "stabilized": {"type": "boolean"},
                    "evidence": {"type": "object"},
                },
            },
        },
        "verdict": {"enum": [v.value for v in Verdict]},
        "caveats": {"type": "array", "items": {"type": "string"}},
        "aborted": {"type": "boolean"},
    },
}


def _plain(obj):
    """Turn numpy scalars/arrays and tuples into JSON-native values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def report_to_dict(report: Report) -> dict:
    data = {
        "schema_version": SCHEMA_VERSION,
        "system": report.system,
        "params": report.params,
        "resolutions": report.levels,
        "induced_maps": report.induced_maps,
        "conditions": [c.to_dict() for c in report.conditions],
        "verdict": report.verdict.value,
        "caveats": list(report.caveats),
        "aborted": report.aborted,
    }
    return _plain(data)


def validate(data: dict):
    jsonschema.validate(data, REPORT_SCHEMA)


def serialize(report: Report) -> str:
    data = report_to_dict(report)
    validate(data)
    return json.dumps(data, sort_keys=True, indent=2) + "\n"


def parse(text: str) -> Report:
    data = json.loads(text)
    validate(data)
    conditions = [ConditionResult(Condition(c["condition"]), Outcome(c["outcome"]),
                                  c["evidence"], c["stabilized"]) for c in data["conditions"]]
    return Report(data["system"], data["params"], data["resolutions"], data["induced_maps"],
                  conditions, Verdict(data["verdict"]), data["caveats"], data["aborted"])


CSV_COLUMNS = ["resolution", "degree", "betti", "torsion"]


def betti_rows(report: Report) -> list[dict]:
    rows = []
    for level in report.levels:
        if "homology" not in level:
            continue
        hom = level["homology"]
        for key in sorted(hom["betti"], key=lambda s: int(s[1:])):
            rows.append({"resolution": level["resolution"], "degree": int(key[1:]),
                         "betti": hom["betti"][key],
                         "torsion": ";".join(str(t) for t in hom["torsion"].get(key, []))})
    return rows


def betti_csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(betti_rows(report))
    return buf.getvalue()
