"""Numerical verification of the predicted orbit and trapping ring."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq
from scipy.integrate import solve_ivp

from .errors import BranchMismatchError, HopfAvgError, IntegrationError, OrbitNotFoundError
from .integrate import integrate, monodromy, return_map
from .predict import averaged_radius

SHOOT_TOL = (1e-12, 1e-10)
STABILITY_MARGIN = 1e-4


@dataclass(frozen=True)
class DetectedOrbit:
    """Closed orbit found by return-map shooting.

    ``rho_max`` and ``rho_mean`` are the largest and mean averaged rescaled
    radius (see :class:`~hopfavg.predict.AveragedRadius`), the quantities
    compared with ``rho0``; ``amplitude = mu * rho_max`` is the same in
    unscaled units.  ``r_max`` is the largest plain canonical radius, which
    still carries the angle-dependent ripple.  ``samples`` holds ``(2, n)``
    model-coordinate points over one period.
    """

    point_on_orbit: np.ndarray
    period: float
    samples: np.ndarray
    times: np.ndarray
    amplitude: float
    r_max: float
    rho_max: float
    rho_mean: float
    mean_radius: float
    closure_residual: float
    section_radius: float
    time_direction: int
    param: float
    mu: float


def _section_tools(hopf, param):
    eq = np.asarray(hopf.eq_branch(param), dtype=float)
    Tinv = hopf.transform_inv

    def section(x):
        return float(Tinv[1] @ (np.asarray(x) - eq))

    def start(s):
        return eq + hopf.transform @ np.array([s, 0.0])

    def radius(x):
        return float(Tinv[0] @ (np.asarray(x) - eq))

    return section, start, radius


def detect_orbit(system, hopf, param, pred, n_samples=512, tol=SHOOT_TOL, seed_radius=None) -> DetectedOrbit:
    """Find the closed orbit at ``param`` by shooting on the half-line ``v = 0, u > 0``.

    The displacement ``P(s) - s`` of the first-return map is bracketed by
    scanning outward from the predicted radius (or ``seed_radius``) within
    ``[0.2, 3]`` times the prediction, then solved by Brent's method.
    Orbits that repel forward in time are located in reversed time.
    """
    alpha = float(hopf.beta(param))
    if alpha == 0 or np.sign(alpha) != pred.branch_side:
        raise BranchMismatchError(f"unfolding parameter {alpha:.6g} at {param} is on the wrong side")
    mu = float(np.sqrt(abs(alpha)))
    r_pred = pred.amplitude_fn(alpha)
    sign = pred.time_direction
    direction = 1 if sign > 0 else -1
    t_guess = pred.period_estimate(param)
    section, start, radius = _section_tools(hopf, param)

    def first_return(s):
        return return_map(system, param, start(s), section, direction=direction, t_guess=t_guess,
                          sign=sign, tol=tol)

    def displacement(s):
        return radius(first_return(s)[1]) - s

    s0 = r_pred if seed_radius is None else float(seed_radius)
    lo_lim, hi_lim = 0.2 * r_pred, 3.0 * r_pred
    try:
        v0 = displacement(s0)
        bracket = None
        if v0 == 0.0:
            bracket = (s0, s0)
        factors = (1.25, 1.6, 2.0, 2.5, 3.0) if v0 > 0 else (0.8, 0.6, 0.45, 0.3, 0.2)
        if seed_radius is not None:
            factors = (1.0 + 1e-6, 1.0 + 1e-4, 1.01, 1.1) if v0 > 0 else (1.0 - 1e-6, 1.0 - 1e-4, 0.99, 0.9)
        prev_s, prev_v = s0, v0
        for f in factors if bracket is None else ():
            s = min(max(s0 * f, lo_lim), hi_lim)
            v = displacement(s)
            if np.sign(v) != np.sign(prev_v):
                bracket = (min(s, prev_s), max(s, prev_s))
                break
            prev_s, prev_v = s, v
    except IntegrationError as exc:
        raise OrbitNotFoundError(f"return map failed: {exc}") from exc
    if bracket is None:
        raise OrbitNotFoundError(
            f"displacement has no sign change in [{lo_lim:.4g}, {hi_lim:.4g}] around the prediction {r_pred:.4g}")
    if bracket[0] == bracket[1]:
        s_star = bracket[0]
    else:
        s_star = brentq(displacement, *bracket, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=30)

    x0 = start(s_star)
    period, x1 = first_return(s_star)
    closure = float(np.linalg.norm(x1 - x0))
    traj = integrate(system, x0, param, (0.0, period), tol=tol, sign=sign)
    times, samples = traj.sample(n_samples, 0.0, period)
    frame = averaged_radius(hopf, param, mu)
    w = frame.transform_inv @ (samples - frame.center[:, None])
    r = np.hypot(w[0], w[1])
    rho_avg, _ = frame.polar(samples)
    return DetectedOrbit(
        point_on_orbit=x0,
        period=float(period),
        samples=samples,
        times=times,
        amplitude=float(mu * rho_avg.max()),
        r_max=float(r.max()),
        rho_max=float(rho_avg.max()),
        rho_mean=float(rho_avg.mean()),
        mean_radius=float(r.mean()),
        closure_residual=closure,
        section_radius=float(s_star),
        time_direction=sign,
        param=float(param),
        mu=mu,
    )


def classify_multiplier(m, margin=STABILITY_MARGIN):
    a = abs(m)
    if a < 1 - margin:
        return "stable"
    if a > 1 + margin:
        return "unstable"
    return "neutral"


def _batched(system, param, sign, m):
    def rhs(t, z):
        return sign * system.eval(z.reshape(system.dim, m), param).ravel()

    return rhs


def trapping_check(system, annulus, n_per_circle=16, periods=20, inflate=1.2, time_direction=1,
                   tol=(1e-10, 1e-8), samples_per_period=64):
    """Integrate trajectories seeded on both boundary circles.

    All ``2 * n_per_circle`` trajectories are stacked into one ODE so the
    solver advances them together.  Returns ``(ok, rho_min, rho_max)`` where
    the extremes are taken over every trajectory and sample.
    """
    hopf = annulus.hopf
    theta = 2 * np.pi * np.arange(n_per_circle) / n_per_circle
    starts = np.concatenate([annulus.to_original(np.full(n_per_circle, annulus.inner_r), theta),
                             annulus.to_original(np.full(n_per_circle, annulus.outer_r), theta)], axis=1)
    m = starts.shape[1]
    T = 2 * np.pi / hopf.gamma(annulus.param)
    t_end = periods * T
    t_eval = np.linspace(0.0, t_end, int(periods * samples_per_period) + 1)
    sol = solve_ivp(_batched(system, annulus.param, time_direction, m), (0.0, t_end), starts.ravel(),
                    method="RK45", rtol=tol[1], atol=tol[0], t_eval=t_eval)
    if sol.status != 0:
        raise IntegrationError(sol.message)
    states = sol.y.reshape(system.dim, m, -1)
    rho, _ = annulus.from_original(states.reshape(system.dim, -1))
    lo, hi = annulus.inflated(inflate)
    return bool(np.all((rho >= lo) & (rho <= hi))), float(rho.min()), float(rho.max())


@dataclass
class VerificationReport:
    """Outcome of checking one prediction against the integrated dynamics."""

    param: float
    alpha: float
    mu: float
    orbit: Optional[DetectedOrbit]
    multipliers: Optional[np.ndarray]
    stability_observed: Optional[str]
    containment: Optional[float]
    trapping: Optional[bool]
    trapping_rho_range: tuple
    prediction_error: Optional[float]
    trivial_multiplier_defect: Optional[float] = None
    liouville_defect: Optional[float] = None
    boundary_signs_ok: Optional[bool] = None
    error: Optional[str] = None
    error_message: Optional[str] = None
    extra: dict = field(default_factory=dict)


def verify(system, hopf, param, pred, annulus, n_samples=512, n_per_circle=16, periods=20,
           check_trapping=True) -> VerificationReport:
    """Shoot for the orbit, compute its multipliers and test the annulus.

    Orbit-not-found is recorded in the report rather than raised; the
    trapping test still runs.  A trapping integration that breaks down
    counts as a failed trapping test.  ``check_trapping=False`` skips it
    (``trapping`` is then ``None``).
    """
    if abs(annulus.param - param) > 1e-12 * max(1.0, abs(param)):
        raise ValueError("annulus was built for a different parameter value")
    orbit = err = msg = None
    try:
        orbit = detect_orbit(system, hopf, param, pred, n_samples=n_samples)
    except OrbitNotFoundError as exc:
        err, msg = exc.code, str(exc)
    multipliers = stability = containment = perr = triv = liou = None
    if orbit is not None:
        mono = monodromy(system, orbit.point_on_orbit, param, orbit.period)
        multipliers = mono.multipliers
        stability = classify_multiplier(mono.multipliers[1])
        triv, liou = mono.trivial_defect, mono.liouville_defect
        rho, _ = annulus.from_original(orbit.samples)
        containment = float(np.mean((rho > annulus.inner_r) & (rho < annulus.outer_r)))
        perr = abs(orbit.rho_max - pred.rho0) / pred.rho0
    trap_ok, rmin, rmax = None, float("nan"), float("nan")
    if check_trapping:
        try:
            trap_ok, rmin, rmax = trapping_check(system, annulus, n_per_circle=n_per_circle, periods=periods,
                                                 time_direction=pred.time_direction)
        except IntegrationError:
            trap_ok = False
    return VerificationReport(
        param=float(param), alpha=annulus.alpha, mu=annulus.mu, orbit=orbit, multipliers=multipliers,
        stability_observed=stability, containment=containment, trapping=trap_ok,
        trapping_rho_range=(rmin, rmax), prediction_error=perr, trivial_multiplier_defect=triv,
        liouville_defect=liou, boundary_signs_ok=annulus.boundary_signs_ok(), error=err, error_message=msg,
    )


def verdict_matches(pred, report):
    """True when the observed multiplier agrees with the sign of ``K``."""
    expected = "stable" if pred.K < 0 else "unstable"
    return report.stability_observed == expected


__all__ = [
    "DetectedOrbit", "VerificationReport", "detect_orbit", "verify", "trapping_check",
    "classify_multiplier", "verdict_matches", "HopfAvgError",
]
