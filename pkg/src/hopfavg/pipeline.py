"""End-to-end analysis: Hopf point, ``K``, predictions, numerical verification.

The command line front end is a thin layer over :func:`analyze` and
:func:`sweep`; both are usable directly from Python.
"""

from __future__ import annotations

import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .averaging import average_K, polar_coefficients
from .errors import (
    BranchMismatchError,
    ConfigError,
    HopfAvgError,
    InvalidParametersError,
)
from .integrate import integrate
from .models import get_model, invariant_level, lift_to_3d
from .normalize import cubic_normal_form, locate_hopf
from .predict import DEGENERACY_TOL, build_annulus, predict
from .report import SCHEMA_VERSION, quantity, write_curve_csv, write_json
from .verify import verdict_matches, verify

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

DEFAULT_SEED = 42
OUT_ENV = "HOPFAVG_OUT"

EXIT_OK, EXIT_FAILED, EXIT_NO_ORBIT, EXIT_DEGENERATE, EXIT_CONFIG = 0, 1, 2, 3, 4

_TOP_KEYS = {"model", "model_params", "bracket", "offsets", "params", "epsilon", "seed", "tolerances",
             "output", "verify"}


@dataclass(frozen=True)
class AnalysisConfig:
    """Validated analysis settings.

    ``offsets`` are displacements of the bifurcation parameter from its Hopf
    value; ``params`` (if given) are absolute parameter values and are used
    in addition to the offsets.  When the offsets are the model defaults
    (``auto_side``) their sign is chosen after ``K`` is known so that they
    land on the side where the orbit exists.
    """

    model: str
    model_params: dict = field(default_factory=dict)
    bracket: Optional[tuple] = None
    offsets: tuple = ()
    params: tuple = ()
    epsilon: object = "auto"
    seed: int = DEFAULT_SEED
    degeneracy_tol: float = DEGENERACY_TOL
    out_dir: Optional[str] = None
    n_samples: int = 512
    trapping_periods: int = 20
    write_csv: bool = True
    auto_side: bool = False

    def as_dict(self):
        return {
            "model": self.model,
            "model_params": dict(self.model_params),
            "bracket": None if self.bracket is None else list(self.bracket),
            "offsets": list(self.offsets),
            "params": list(self.params),
            "epsilon": self.epsilon,
            "seed": self.seed,
            "degeneracy_tol": self.degeneracy_tol,
            "n_samples": self.n_samples,
            "trapping_periods": self.trapping_periods,
            "auto_side": self.auto_side,
        }


def _number(x, what):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not np.isfinite(x):
        raise ConfigError(f"{what} must be a finite number, got {x!r}")
    return float(x)


def config_from_dict(d) -> AnalysisConfig:
    """Validate a parsed TOML document (or an equivalent dict)."""
    if not isinstance(d, dict):
        raise ConfigError("configuration must be a table")
    unknown = set(d) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
    if "model" not in d:
        raise ConfigError("missing required key 'model'")
    seed = d.get("seed", DEFAULT_SEED)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    try:
        spec = get_model(d["model"])
        given = dict(d.get("model_params", {}))
        if "seed" in spec.defaults():
            given.setdefault("seed", seed)
        model_params = spec.resolve(given)
    except InvalidParametersError as exc:
        raise ConfigError(str(exc)) from exc
    bracket = d.get("bracket")
    if bracket is not None:
        if not isinstance(bracket, (list, tuple)) or len(bracket) != 2:
            raise ConfigError("bracket must be a two-element list")
        bracket = tuple(_number(b, "bracket entry") for b in bracket)
        if not bracket[0] < bracket[1]:
            raise ConfigError("bracket must be increasing")
    auto_side = "offsets" not in d and "params" not in d
    offsets = tuple(_number(o, "offset") for o in d.get("offsets", spec.default_offsets if auto_side else ()))
    params = tuple(_number(p, "param") for p in d.get("params", ()))
    eps = d.get("epsilon", "auto")
    if isinstance(eps, str):
        if eps != "auto":
            raise ConfigError("epsilon must be 'auto' or a number in (0, 1)")
    else:
        eps = _number(eps, "epsilon")
        if not 0 < eps < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
    tol = d.get("tolerances", {})
    ver = d.get("verify", {})
    out = d.get("output", {})
    return AnalysisConfig(
        model=spec.name,
        model_params=model_params,
        bracket=bracket,
        offsets=offsets,
        params=params,
        epsilon=eps,
        seed=seed,
        degeneracy_tol=_number(tol.get("degeneracy", DEGENERACY_TOL), "tolerances.degeneracy"),
        out_dir=out.get("dir"),
        n_samples=int(ver.get("n_samples", 512)),
        trapping_periods=int(ver.get("trapping_periods", 20)),
        write_csv=bool(out.get("csv", True)),
        auto_side=auto_side,
    )


def load_config(path) -> AnalysisConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return config_from_dict(data)


def resolve_out_dir(cli_out=None, cfg: Optional[AnalysisConfig] = None, env=None):
    """``--out`` beats ``$HOPFAVG_OUT``, which beats ``[output] dir``."""
    env = os.environ if env is None else env
    for cand in (cli_out, env.get(OUT_ENV), cfg.out_dir if cfg else None):
        if cand:
            return Path(cand)
    return Path("hopfavg-out")


@dataclass
class _Context:
    """Model, Hopf data and prediction shared by all runs of one analysis."""

    cfg: AnalysisConfig
    values: dict
    system: object
    hopf: object = None
    K: float = None
    K_quad: float = None
    pred: object = None
    three_d: object = None


def prepare(cfg: AnalysisConfig, timing=None) -> _Context:
    """Build the model, locate the Hopf point and compute ``K``."""
    timing = {} if timing is None else timing
    spec, values = get_model(cfg.model), dict(cfg.model_params)
    t0 = time.perf_counter()
    try:
        system = spec.build(values)
    except InvalidParametersError as exc:
        raise ConfigError(str(exc)) from exc
    ctx = _Context(cfg, values, system)
    if "three_d" in spec.extras:
        ctx.three_d = spec.extras["three_d"](values)
    bracket = cfg.bracket or spec.bracket(values)
    ctx.hopf = locate_hopf(system, alpha_bracket=bracket)
    timing["locate_hopf"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    pc = polar_coefficients(cubic_normal_form(system, ctx.hopf))
    ctx.K, ctx.K_quad = average_K(pc, return_both=True)
    ctx.pred = predict(ctx.K, ctx.hopf, degeneracy_tol=cfg.degeneracy_tol)
    timing["normal_form_and_K"] = time.perf_counter() - t0
    return ctx


def _state_unit(ctx):
    return "biomass" if ctx.system.param_name == "k" else "state"


def _param_unit(ctx):
    return "biomass" if ctx.system.param_name == "k" else "1/time"


def run_one(ctx: _Context, param, offset, index=None, out_dir=None, check_trapping=True):
    """Predict, build the annulus and verify at one parameter value."""
    cfg, hopf, pred = ctx.cfg, ctx.hopf, ctx.pred
    run = {"offset": float(offset), "param": float(param), "status": "ok", "error": None, "files": {}}
    su = _state_unit(ctx)
    try:
        annulus = build_annulus(pred, hopf, param, epsilon=cfg.epsilon)
    except BranchMismatchError as exc:
        run.update(status="branch-mismatch", error={"code": exc.code, "message": str(exc)})
        return run, None
    alpha = annulus.alpha
    run["alpha"] = quantity(alpha, "1/time", "alpha")
    run["mu"] = quantity(annulus.mu, "sqrt(1/time)", "mu")
    run["predicted_amplitude"] = quantity(pred.amplitude_fn(alpha), su, "amplitude")
    run["predicted_period"] = quantity(pred.period_estimate(param), "time", "period")
    run["annulus"] = {
        "epsilon": quantity(annulus.epsilon, "dimensionless", "epsilon"),
        "epsilon_rule": "auto" if cfg.epsilon == "auto" else "fixed",
        "inner_rho": quantity(annulus.inner_r, "dimensionless", "annulus"),
        "outer_rho": quantity(annulus.outer_r, "dimensionless", "annulus"),
        "center": quantity(annulus.center, su, "annulus"),
        "boundary_signs_ok": annulus.boundary_signs_ok(),
    }
    try:
        rep = verify(ctx.system, hopf, param, pred, annulus, n_samples=cfg.n_samples,
                     periods=cfg.trapping_periods, check_trapping=check_trapping)
    except HopfAvgError as exc:
        run.update(status="failed", error={"code": exc.code, "message": str(exc)})
        return run, None
    orbit = rep.orbit
    if orbit is None:
        run.update(status="orbit-not-found", error={"code": rep.error, "message": rep.error_message})
        run["orbit"] = None
    else:
        run["orbit"] = {
            "period": quantity(orbit.period, "time", "period"),
            "amplitude": quantity(orbit.amplitude, su, "amplitude"),
            "r_max": quantity(orbit.r_max, su, "amplitude"),
            "rho_max": quantity(orbit.rho_max, "dimensionless", "rho0"),
            "rho_mean": quantity(orbit.rho_mean, "dimensionless", "rho0"),
            "closure_residual": quantity(orbit.closure_residual, su, "closure"),
            "point_on_orbit": quantity(orbit.point_on_orbit, su, "closure"),
            "time_direction": orbit.time_direction,
            "n_samples": int(orbit.samples.shape[1]),
        }
        run["multipliers"] = quantity(np.asarray(rep.multipliers, dtype=complex), "dimensionless", "multipliers")
        run["trivial_multiplier_defect"] = float(rep.trivial_multiplier_defect)
        run["liouville_defect"] = float(rep.liouville_defect)
        run["stability_observed"] = rep.stability_observed
        run["verdict_consistent"] = verdict_matches(pred, rep)
        run["containment"] = quantity(rep.containment, "fraction", "containment")
        run["prediction_error"] = float(rep.prediction_error)
    if rep.trapping is not None:
        lo, hi = annulus.inflated(1.2)
        run["trapping"] = {
            "ok": rep.trapping,
            "rho_range": [float(v) if np.isfinite(v) else None for v in rep.trapping_rho_range],
            "inflated_bounds": [float(lo), float(hi)],
            "tag": "boundary-seeded trajectories stay in the 1.2x ring",
        }
    else:
        run["trapping"] = None
    if orbit is not None and ctx.three_d is not None:
        run["cylinder_slice"] = _lift_check(ctx, orbit, param)
    if out_dir is not None and cfg.write_csv:
        _write_run_csv(ctx, run, annulus, orbit, index, out_dir)
    return run, rep


def _lift_check(ctx, orbit, param):
    """Integrate the 3D model from the lifted orbit point over one period."""
    p = ctx.system.meta["params"]
    x0 = lift_to_3d(p, orbit.point_on_orbit)
    traj = integrate(ctx.three_d, x0, param, (0.0, orbit.period), tol=(1e-12, 1e-10))
    levels = invariant_level(p, traj.y)
    return {
        "closure_residual_3d": float(np.linalg.norm(traj.final - x0)),
        "invariant_drift": float(np.max(np.abs(levels - p.c)) / max(p.c, 1e-300)) if p.c > 0 else float(np.max(np.abs(traj.y[2]))),
        "c": float(p.c),
    }


def _write_run_csv(ctx, run, annulus, orbit, index, out_dir):
    out_dir = Path(out_dir)
    tag = f"{index:02d}"
    theta = np.linspace(0.0, 2 * np.pi, 256, endpoint=False)
    files = {}
    lift = None
    if ctx.three_d is not None:
        p = ctx.system.meta["params"]
        lift = lambda pts: np.vstack([pts, p.c * pts[1] ** p.rho])
    for name, rho in (("annulus_inner", annulus.inner_r), ("annulus_outer", annulus.outer_r)):
        pts = annulus.to_original(np.full(theta.size, rho), theta)
        path = out_dir / f"{name}_{tag}.csv"
        write_curve_csv(path, theta, lift(pts) if lift else pts)
        files[name] = path.name
    if orbit is not None:
        path = out_dir / f"orbit_{tag}.csv"
        write_curve_csv(path, orbit.times, lift(orbit.samples) if lift else orbit.samples)
        files["orbit"] = path.name
    run["files"] = files


def _base_report(cfg):
    return {
        "schema_version": SCHEMA_VERSION,
        "software": {"name": "hopfavg", "version": __version__},
        "config": cfg.as_dict(),
        "model": {"name": cfg.model, "label": "", "param_name": "", "params": {}},
        "hopf": None,
        "K": None,
        "prediction": None,
        "runs": [],
        "error": None,
        "exit_code": EXIT_OK,
        "notes": [
            "annulus half-width: 0.5 sqrt(mu) clamped to [0.05, 0.5] when epsilon = 'auto' (implementation choice)",
            "radii are measured in the averaged rescaled radius (second-order near-identity change)",
        ],
        "timing": {},
    }


def _json_params(values):
    return {k: (list(v) if isinstance(v, (list, tuple)) else v) for k, v in values.items()}


def analyze(cfg: AnalysisConfig, out_dir=None):
    """Run the full pipeline; returns ``(report, exit_code)``.

    When ``out_dir`` is given the report (``report.json``) and CSV curves are
    written there.
    """
    report = _base_report(cfg)
    timing = report["timing"]
    t_start = time.perf_counter()
    if out_dir is not None:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    try:
        ctx = prepare(cfg, timing)
    except ConfigError as exc:
        return _finish(report, EXIT_CONFIG, exc, out_dir, t_start)
    except HopfAvgError as exc:
        return _finish(report, EXIT_FAILED, exc, out_dir, t_start)
    h, pred = ctx.hopf, ctx.pred
    pu, su = _param_unit(ctx), _state_unit(ctx)
    report["model"] = {"name": cfg.model, "label": ctx.system.label, "param_name": ctx.system.param_name,
                       "params": _json_params(ctx.values)}
    report["hopf"] = {
        "alpha0": quantity(h.alpha0, pu, "alpha0"),
        "gamma0": quantity(h.gamma0, "rad/time", "gamma0"),
        "beta_prime": quantity(h.beta_prime, f"(1/time)/({pu})", "beta_prime"),
        "equilibrium": quantity(h.equilibrium, su, "equilibrium"),
        "transform": h.transform.tolist(),
        "canonical_defect": h.canonical_defect(),
    }
    k_unit = f"1/(time {su}^2)"
    report["K"] = {"moments": quantity(ctx.K, k_unit, "K"), "quadrature": quantity(ctx.K_quad, k_unit, "K_quadrature")}
    report["prediction"] = {
        "verdict": pred.verdict,
        "rho0": None if pred.degenerate else quantity(pred.rho0, "dimensionless", "rho0"),
        "branch_side": pred.branch_side,
        "degeneracy_threshold": cfg.degeneracy_tol,
    }
    if ctx.system.param_name == "k":
        report["notes"].append("stability reported through sign(K): negative K gives an orbitally stable cycle")
    if pred.degenerate:
        err = {"code": "degenerate-K", "message": f"|K| = {abs(ctx.K):.3e} < {cfg.degeneracy_tol:g}"}
        report["error"] = err
        return _finish(report, EXIT_DEGENERATE, None, out_dir, t_start)

    offsets = cfg.offsets
    if cfg.auto_side:
        offsets = tuple(pred.branch_side * abs(o) for o in offsets)
        report["notes"].append("default offsets placed on the branch side predicted by sign(K)")
    targets = [(o, h.alpha0 + o) for o in offsets] + [(p - h.alpha0, p) for p in cfg.params]
    t0 = time.perf_counter()
    codes = []
    for i, (off, param) in enumerate(targets):
        run, _ = run_one(ctx, param, off, index=i, out_dir=out_dir)
        report["runs"].append(run)
        codes.append(run["status"])
    timing["verify"] = time.perf_counter() - t0
    if "branch-mismatch" in codes:
        side = "positive" if pred.branch_side * np.sign(h.beta_prime) > 0 else "negative"
        report["error"] = {"code": "branch-mismatch",
                           "message": f"offsets must be {side} for this K (orbit exists on that side)"}
        code = EXIT_CONFIG
    elif "orbit-not-found" in codes:
        report["error"] = {"code": "orbit-not-found", "message": "no closed orbit found for at least one offset"}
        code = EXIT_NO_ORBIT
    elif "failed" in codes:
        report["error"] = {"code": "run-failed", "message": "at least one verification run failed"}
        code = EXIT_FAILED
    else:
        code = EXIT_OK
    return _finish(report, code, None, out_dir, t_start)


def _finish(report, code, exc, out_dir, t_start):
    if exc is not None:
        report["error"] = {"code": getattr(exc, "code", "error"), "message": str(exc)}
    report["exit_code"] = code
    report["timing"]["total"] = time.perf_counter() - t_start
    if out_dir is not None:
        write_json(Path(out_dir) / "report.json", report)
    return report, code


SWEEP_COLUMNS = ["index", "grid_value", "param", "alpha", "K", "rho0", "amplitude", "rho_max", "containment",
                 "stability_observed", "status", "error"]


def sweep(cfg: AnalysisConfig, name, grid: Sequence[float]):
    """One row per grid value, in grid order.

    ``name`` is either the model's bifurcation parameter (grid values are
    absolute parameter values) or one of the model parameters (the model is
    rebuilt for each value and analysed at the first configured offset).
    Failures are recorded in the row; the sweep always continues.
    """
    spec = get_model(cfg.model)
    rows = []
    base_ctx = None
    for i, g in enumerate(grid):
        row = {"index": i, "grid_value": float(g), "status": "ok", "error": None}
        try:
            if base_ctx is None:
                base_ctx = prepare(cfg)
            if name == base_ctx.system.param_name:
                ctx, param = base_ctx, float(g)
            elif name in spec.defaults():
                mp = dict(cfg.model_params)
                mp[name] = float(g)
                ctx = prepare(replace(cfg, model_params=mp))
                off = cfg.offsets[0] if cfg.offsets else spec.default_offsets[0]
                if cfg.auto_side or not cfg.offsets:
                    off = abs(off) * (ctx.pred.branch_side or 1)
                param = ctx.hopf.alpha0 + off
            else:
                raise ConfigError(f"{name!r} is neither the bifurcation parameter nor a model parameter")
            row["param"] = float(param)
            row["K"] = float(ctx.K)
            if ctx.pred.degenerate:
                row.update(status="degenerate", error="|K| below threshold")
                rows.append(row)
                continue
            row["rho0"] = float(ctx.pred.rho0)
            row["alpha"] = float(ctx.hopf.beta(param))
            run, rep = run_one(ctx, param, param - ctx.hopf.alpha0, check_trapping=False)
            row["status"] = run["status"]
            if run["error"]:
                row["error"] = run["error"]["message"]
            if rep is not None and rep.orbit is not None:
                row.update(amplitude=rep.orbit.amplitude, rho_max=rep.orbit.rho_max, containment=rep.containment,
                           stability_observed=rep.stability_observed)
        except ConfigError as exc:
            row.update(status="config-error", error=str(exc))
        except HopfAvgError as exc:
            row.update(status="failed", error=f"{exc.code}: {exc}")
        rows.append(row)
    return rows
