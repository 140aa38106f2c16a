"""Command line front end.

Usage::

    hopfavg analyze --config run.toml [--out DIR]
    hopfavg sweep --config run.toml --param k --grid 2.9,3.05,3.2 [--out DIR]
    hopfavg list-models [--json]

The output directory is taken from ``--out``, then ``$HOPFAVG_OUT``, then the
config's ``[output] dir``.  Exit codes: 0 success, 1 analysis failure,
2 orbit not found, 3 degenerate ``K``, 4 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .errors import ConfigError
from .models import list_models
from .pipeline import (
    EXIT_CONFIG,
    EXIT_OK,
    SWEEP_COLUMNS,
    analyze,
    load_config,
    resolve_out_dir,
    sweep,
)
from .report import write_table_csv


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def cmd_analyze(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = resolve_out_dir(args.out, cfg)
    report, code = analyze(cfg, out_dir=out)
    h, k, pred = report["hopf"], report["K"], report["prediction"]
    print(f"model      {report['model']['label'] or cfg.model}")
    if h:
        print(f"hopf       {report['model']['param_name']}* = {h['alpha0']['value']:.10g}, "
              f"gamma0 = {h['gamma0']['value']:.10g}, beta' = {h['beta_prime']['value']:.6g}")
    if k:
        print(f"K          {k['moments']['value']:.12g}  ({pred['verdict']})")
    for run in report["runs"]:
        orbit = run.get("orbit")
        line = f"param {run['param']:.6g}: {run['status']}"
        if orbit:
            line += (f", amplitude {orbit['amplitude']['value']:.6g} (predicted {run['predicted_amplitude']['value']:.6g})"
                     f", period {orbit['period']['value']:.6g}, containment {run['containment']['value']:.3f}"
                     f", {run['stability_observed']}")
        if run.get("trapping"):
            line += f", trapping {'ok' if run['trapping']['ok'] else 'FAILED'}"
        print(line)
    if report["error"]:
        print(f"error      {report['error']['code']}: {report['error']['message']}", file=sys.stderr)
    print(f"report     {out / 'report.json'}")
    return code


def _parse_grid(text):
    if text is None or not text.strip():
        return []
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad grid {text!r}: {exc}") from exc


def cmd_sweep(args):
    try:
        cfg = load_config(args.config)
        grid = _parse_grid(args.grid)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = sweep(cfg, args.param, grid)
    out = resolve_out_dir(args.out, cfg)
    out.mkdir(parents=True, exist_ok=True)
    write_table_csv(out / "sweep.csv", rows, SWEEP_COLUMNS)
    cols = ["grid_value", "param", "alpha", "K", "rho0", "amplitude", "containment", "status"]
    print("  ".join(f"{c:>12s}" for c in cols))
    for row in rows:
        print("  ".join(f"{_fmt(row.get(c)):>12s}" for c in cols))
    print(f"table written to {out / 'sweep.csv'}")
    return EXIT_OK


def cmd_list_models(args):
    models = list_models()
    if args.json:
        print(json.dumps(models, indent=2))
        return EXIT_OK
    for m in models:
        print(f"{m['name']}: {m['description']}")
        for p in m["params"]:
            print(f"    {p['name']:<8} default {p['default']!s:<6} [{p['unit']}]  {p['doc']}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="hopfavg", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="run the full pipeline for one configuration")
    a.add_argument("--config", required=True)
    a.add_argument("--out", default=None, help="output directory")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("sweep", help="repeat the analysis over a parameter grid")
    s.add_argument("--config", required=True)
    s.add_argument("--param", required=True, help="bifurcation parameter or a model parameter")
    s.add_argument("--grid", required=True, help="comma separated values")
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_sweep)

    lm = sub.add_parser("list-models", help="show registered models and their parameters")
    lm.add_argument("--json", action="store_true", help="machine-readable output")
    lm.set_defaults(func=cmd_list_models)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
