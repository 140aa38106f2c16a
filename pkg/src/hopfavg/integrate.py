"""Adaptive integration, section crossings and monodromy matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError
from .vectorfield import ParametricSystem, PeriodicSystem, jacobian

DEFAULT_TOL = (1e-10, 1e-8)  # (atol, rtol)
SECTION_TOL = 1e-10


@dataclass(frozen=True)
class Trajectory:
    """Accepted steps of an integration plus a dense interpolant.

    Calling the trajectory at a stored sample time returns the stored state
    itself; anywhere else the solver's 4th-order continuous extension is used.
    """

    t: np.ndarray
    y: np.ndarray  # shape (n, len(t))
    dense: Callable
    tol: Tuple[float, float]

    def __call__(self, t):
        if np.ndim(t) > 0:
            return np.column_stack([self(ti) for ti in np.ravel(t)])
        t = float(t)
        i = np.searchsorted(self.t, t)
        if i < self.t.size and self.t[i] == t:
            return self.y[:, i].copy()
        return np.asarray(self.dense(t), dtype=float)

    @property
    def t_final(self):
        return float(self.t[-1])

    @property
    def final(self):
        return self.y[:, -1].copy()

    def sample(self, n, t0=None, t1=None):
        """States at ``n`` equally spaced times (both ends included)."""
        t0 = self.t[0] if t0 is None else t0
        t1 = self.t[-1] if t1 is None else t1
        ts = np.linspace(t0, t1, n)
        return ts, self(ts)


def _rhs_for(system, alpha, sign):
    if isinstance(system, ParametricSystem):
        return system.rhs(alpha, sign)
    if isinstance(system, PeriodicSystem):
        # slow form x' = alpha f(t, x, alpha)
        return lambda t, x: sign * alpha * system.eval(t, x, alpha)
    return lambda t, x: sign * np.asarray(system(t, x), dtype=float)


def integrate(system, x0, alpha, t_span, tol=DEFAULT_TOL, sign=1.0, max_step=np.inf) -> Trajectory:
    """Integrate ``x' = sign * f`` over ``t_span`` with a Dormand-Prince 4(5) pair.

    Parameters
    ----------
    system : ParametricSystem, PeriodicSystem or callable ``(t, x) -> x'``
    x0 : array_like
    alpha : float
        Parameter value forwarded to the system.
    t_span : (float, float)
    tol : (atol, rtol)
    sign : float
        ``-1`` integrates the time-reversed field.
    """
    atol, rtol = tol
    if not (atol > 0 and rtol > 0):
        raise ValueError("tolerances must be positive")
    t0, t1 = map(float, t_span)
    if not t1 != t0:
        raise ValueError("empty time span")
    sol = solve_ivp(
        _rhs_for(system, alpha, sign),
        (t0, t1),
        np.asarray(x0, dtype=float),
        method="RK45",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        max_step=max_step,
    )
    if sol.status != 0:
        t_last = float(sol.t[-1]) if sol.t.size else t0
        y_last = sol.y[:, -1] if sol.t.size else np.asarray(x0, dtype=float)
        raise IntegrationError(sol.message, t_last=t_last, state_last=y_last)
    return Trajectory(t=sol.t, y=sol.y, dense=sol.sol, tol=(atol, rtol))


@dataclass(frozen=True)
class SectionCrossing:
    t_cross: float
    state_cross: np.ndarray
    direction: int


def refine_crossing(traj, section, ta, tb, tol=SECTION_TOL, max_iter=200):
    """Bisection on the dense output for a sign change of ``section`` in [ta, tb].

    Bisection continues until the bracket is a few ulps wide, so refining an
    already refined crossing again returns the same time to ~1e-13.
    """
    sa = section(traj(ta))
    sb = section(traj(tb))
    if sa == 0.0:
        return ta
    if sb == 0.0:
        return tb
    for _ in range(max_iter):
        tm = 0.5 * (ta + tb)
        sm = section(traj(tm))
        if sm == 0.0:
            return tm
        if np.sign(sm) == np.sign(sa):
            ta, sa = tm, sm
        else:
            tb, sb = tm, sm
        if tb - ta <= 8 * np.finfo(float).eps * max(1.0, abs(tm)):
            break
    t = ta if abs(sa) < abs(sb) else tb
    if min(abs(sa), abs(sb)) > tol:
        # the section value could not be driven below tol (steep section); keep the best point
        pass
    return t


def find_crossings(traj: Trajectory, section, direction=1, tol=SECTION_TOL) -> List[SectionCrossing]:
    """All crossings of ``section(x) = 0`` in the requested direction.

    A crossing is reported for each pair of consecutive samples where the
    section value goes from strictly negative to non-negative (``+1``) or from
    strictly positive to non-positive (``-1``).  The starting point is never
    reported.
    """
    s = np.array([section(traj.y[:, i]) for i in range(traj.t.size)])
    out = []
    for i in range(s.size - 1):
        a, b = s[i], s[i + 1]
        hit = (a < 0 <= b) if direction > 0 else (a > 0 >= b)
        if not hit:
            continue
        tc = refine_crossing(traj, section, traj.t[i], traj.t[i + 1], tol=tol)
        out.append(SectionCrossing(t_cross=float(tc), state_cross=traj(tc), direction=direction))
    return out


@dataclass(frozen=True)
class MonodromyResult:
    """Fundamental matrix over one period and its eigenvalues.

    ``multipliers`` are ordered with the one closest to 1 first.
    """

    matrix: np.ndarray
    multipliers: np.ndarray
    trace_integral: float
    period: float

    @property
    def liouville_defect(self):
        """Relative mismatch between ``det(matrix)`` and ``exp(int tr J dt)``."""
        expected = np.exp(self.trace_integral)
        return float(abs(np.prod(self.multipliers).real - expected) / abs(expected))

    @property
    def trivial_defect(self):
        return float(abs(self.multipliers[0] - 1.0))

    @property
    def nontrivial(self):
        return self.multipliers[1:]


def monodromy(system, orbit_start, alpha, period, tol=(1e-12, 1e-10), jac=None) -> MonodromyResult:
    """Integrate the orbit together with its variational equation.

    Parameters
    ----------
    system : ParametricSystem
    orbit_start : array_like
        A point on the closed orbit.
    period : float
        Return time of the orbit; must be positive.
    jac : callable, optional
        ``jac(x, alpha)``; defaults to the finite-difference Jacobian.
    """
    if not period > 0:
        raise ValueError("period must be positive")
    x0 = np.asarray(orbit_start, dtype=float)
    n = x0.size
    if jac is None:
        jac = system.meta.get("jac") or (lambda x, a: jacobian(system, x, a))

    def rhs(t, z):
        x = z[:n]
        phi = z[n:n + n * n].reshape(n, n)
        J = jac(x, alpha)
        return np.concatenate([system.eval(x, alpha), (J @ phi).ravel(), [np.trace(J)]])

    z0 = np.concatenate([x0, np.eye(n).ravel(), [0.0]])
    traj = integrate(rhs, z0, alpha, (0.0, period), tol=tol)
    zT = traj.final
    M = zT[n:n + n * n].reshape(n, n)
    ev = np.linalg.eigvals(M)
    order = np.argsort(np.abs(ev - 1.0))
    return MonodromyResult(matrix=M, multipliers=ev[order], trace_integral=float(zT[-1]), period=float(period))


def return_map(system, alpha, x0, section, direction=1, t_guess=2 * np.pi, sign=1.0,
               tol=(1e-12, 1e-10), min_time=None, max_time=None):
    """First return of the trajectory from ``x0`` to ``section``.

    Integrates in chunks of ``1.5 * t_guess`` until a crossing later than
    ``min_time`` (default ``0.25 * t_guess``) is found.

    Returns
    -------
    (t_return, state) : float, ndarray
    """
    min_time = 0.25 * t_guess if min_time is None else min_time
    max_time = 20.0 * t_guess if max_time is None else max_time
    t0, x = 0.0, np.asarray(x0, dtype=float)
    while t0 < max_time:
        t1 = t0 + 1.5 * t_guess
        traj = integrate(system, x, alpha, (t0, t1), tol=tol, sign=sign)
        for c in find_crossings(traj, section, direction):
            if c.t_cross > min_time:
                return c.t_cross, c.state_cross
        t0, x = t1, traj.final
    raise IntegrationError("no return to the section", t_last=t0, state_last=x)
