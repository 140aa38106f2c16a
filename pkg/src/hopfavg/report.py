"""JSON report layout, its schema and CSV writers."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

SCHEMA_VERSION = "1.0"

# Short tags naming the relation each reported number realizes.
TAGS = {
    "alpha0": "hopf-point: Re lambda(alpha0) = 0",
    "gamma0": "hopf-point: Im lambda(alpha0) > 0",
    "beta_prime": "transversality: d Re lambda / d alpha > 0",
    "equilibrium": "equilibrium branch at alpha0",
    "K": "averaged cubic coefficient <C4 - C3 D3 / gamma0>",
    "K_quadrature": "same average by composite Simpson (N=1024)",
    "rho0": "rescaled orbit radius |K|^(-1/2)",
    "amplitude": "amplitude law r = sqrt(|alpha|) |K|^(-1/2)",
    "period": "period estimate 2 pi / gamma(alpha)",
    "alpha": "unfolding parameter Re lambda at the working parameter",
    "mu": "scale mu = sqrt(|alpha|)",
    "epsilon": "annulus half-width rule 0.5 sqrt(mu) clamped to [0.05, 0.5]",
    "annulus": "trapping ring (1 - eps) rho0 < rho < (1 + eps) rho0 in averaged radius",
    "closure": "periodicity test |x(T) - x(0)|",
    "multipliers": "eigenvalues of the monodromy matrix",
    "containment": "fraction of orbit samples inside the ring",
    "trapping": "boundary-seeded trajectories stay in the 1.2x ring",
}


def quantity(value, unit, tag_key):
    """A number together with its unit and the relation it realizes."""
    return {"value": _plain(value), "unit": unit, "tag": TAGS[tag_key]}


def _plain(x):
    if isinstance(x, np.ndarray):
        return [_plain(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [_plain(float(np.real(x))), _plain(float(np.imag(x)))]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def to_json(report):
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, report):
    Path(path).write_text(to_json(report))


def write_curve_csv(path, t, points):
    """Write ``t, x1, x2[, x3]`` rows; ``points`` has shape ``(n, len(t))``."""
    points = np.asarray(points, dtype=float)
    header = ["t"] + [f"x{i + 1}" for i in range(points.shape[0])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for i, ti in enumerate(np.asarray(t, dtype=float)):
            w.writerow([repr(float(ti))] + [repr(float(v)) for v in points[:, i]])


def write_table_csv(path, rows, columns):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        w.writeheader()
        for row in rows:
            w.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in columns})


_QTY = {
    "type": "object",
    "required": ["value", "unit", "tag"],
    "properties": {
        "value": {},
        "unit": {"type": "string"},
        "tag": {"type": "string"},
    },
    "additionalProperties": False,
}
_NQTY = {"anyOf": [{"type": "null"}, {"$ref": "#/definitions/quantity"}]}
_ERROR = {
    "anyOf": [
        {"type": "null"},
        {
            "type": "object",
            "required": ["code", "message"],
            "properties": {"code": {"type": "string"}, "message": {"type": "string"}},
        },
    ]
}

REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "title": "hopfavg analysis report",
    "type": "object",
    "definitions": {"quantity": _QTY},
    "required": ["schema_version", "software", "config", "model", "hopf", "K", "prediction", "runs",
                 "error", "exit_code", "timing"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "software": {
            "type": "object",
            "required": ["name", "version"],
            "properties": {"name": {"type": "string"}, "version": {"type": "string"}},
        },
        "config": {"type": "object"},
        "model": {
            "type": "object",
            "required": ["name", "label", "param_name", "params"],
            "properties": {
                "name": {"type": "string"},
                "label": {"type": "string"},
                "param_name": {"type": "string"},
                "params": {"type": "object"},
            },
        },
        "hopf": {
            "anyOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["alpha0", "gamma0", "beta_prime", "equilibrium"],
                    "properties": {k: {"$ref": "#/definitions/quantity"}
                                   for k in ("alpha0", "gamma0", "beta_prime", "equilibrium")},
                },
            ]
        },
        "K": {
            "anyOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["moments", "quadrature"],
                    "properties": {"moments": {"$ref": "#/definitions/quantity"},
                                   "quadrature": {"$ref": "#/definitions/quantity"}},
                },
            ]
        },
        "prediction": {
            "anyOf": [
                {"type": "null"},
                {
                    "type": "object",
                    "required": ["verdict", "rho0", "branch_side", "degeneracy_threshold"],
                    "properties": {
                        "verdict": {"enum": ["supercritical-stable", "subcritical-unstable", "degenerate"]},
                        "rho0": _NQTY,
                        "branch_side": {"enum": [-1, 0, 1]},
                        "degeneracy_threshold": {"type": "number"},
                    },
                },
            ]
        },
        "runs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["offset", "param", "status", "error"],
                "properties": {
                    "offset": {"type": "number"},
                    "param": {"type": "number"},
                    "status": {"enum": ["ok", "orbit-not-found", "branch-mismatch", "failed"]},
                    "alpha": _NQTY,
                    "mu": _NQTY,
                    "predicted_amplitude": _NQTY,
                    "predicted_period": _NQTY,
                    "annulus": {"type": ["object", "null"]},
                    "orbit": {"type": ["object", "null"]},
                    "multipliers": _NQTY,
                    "stability_observed": {"type": ["string", "null"]},
                    "verdict_consistent": {"type": ["boolean", "null"]},
                    "containment": _NQTY,
                    "trapping": {"type": ["object", "null"]},
                    "cylinder_slice": {"type": "object"},
                    "prediction_error": {"type": ["number", "null"]},
                    "files": {"type": "object"},
                    "error": _ERROR,
                },
            },
        },
        "error": _ERROR,
        "exit_code": {"enum": [0, 1, 2, 3, 4]},
        "notes": {"type": "array", "items": {"type": "string"}},
        "timing": {"type": "object"},
    },
}
