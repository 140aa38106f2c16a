"""Hopf point location, the Jordan transform and cubic Taylor coefficients."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import (
    DegenerateEquilibriumError,
    NoEquilibriumError,
    NoHopfInBracketError,
    TransversalityError,
)
from .vectorfield import d_alpha_eigen_real, derivatives_at, focus_eigenvalue, jacobian

HOPF_TOL = 1e-10
TRANSVERSALITY_TOL = 1e-6


def find_equilibrium(system, guess, alpha, tol=1e-12, max_iter=50):
    """Newton iteration for ``f(x, alpha) = 0`` with a backtracking line search."""
    x = np.asarray(guess, dtype=float).copy()
    fx = system.eval(x, alpha)
    for _ in range(max_iter):
        res = float(np.linalg.norm(fx))
        if res < tol:
            return x
        J = jacobian(system, x, alpha)
        if np.linalg.cond(J) > 1e13:
            raise DegenerateEquilibriumError(f"singular Jacobian at {x}")
        dx = np.linalg.solve(J, -fx)
        step = 1.0
        while step > 1e-6:
            xn = x + step * dx
            fn = system.eval(xn, alpha)
            if np.all(np.isfinite(fn)) and np.linalg.norm(fn) < (1 - 1e-4 * step) * res:
                break
            step /= 2
        else:
            xn = x + dx
            fn = system.eval(xn, alpha)
        x, fx = xn, fn
        if not np.all(np.isfinite(x)):
            break
    if np.all(np.isfinite(fx)) and np.linalg.norm(fx) < tol:
        return x
    raise NoEquilibriumError(f"Newton did not converge from {guess} at alpha={alpha}")


def continued_branch(system, guess):
    """Equilibrium branch obtained by Newton solves seeded at ``guess``."""
    guess = np.asarray(guess, dtype=float)

    @lru_cache(maxsize=512)
    def branch(alpha):
        return find_equilibrium(system, guess, alpha)

    return lambda alpha: branch(float(alpha)).copy()


def jordan_transform(J):
    """Real Jordan basis ``T`` with ``inv(T) J T = [[beta, -gamma], [gamma, beta]]``.

    Follows the ``[[1, p], [0, q]]`` recipe with ``p = (beta - a11) / w`` and
    ``q = -a21 / w``, ``w = |Im lambda|``.  That recipe produces a clockwise
    canonical block, so the second column is negated to make ``gamma > 0``.
    """
    J = np.asarray(J, dtype=float)
    lam = focus_eigenvalue(J)
    beta, w = lam.real, lam.imag
    p = (beta - J[0, 0]) / w
    q = -J[1, 0] / w
    T = np.array([[1.0, p], [0.0, q]])
    Tinv = np.linalg.inv(T)
    C = Tinv @ J @ T
    if C[1, 0] < 0:
        T[:, 1] *= -1
        Tinv = np.linalg.inv(T)
    return T, Tinv


@dataclass(frozen=True)
class HopfData:
    """Everything known about the Hopf point of a parametric planar system.

    ``transform`` maps canonical coordinates ``w = (u, v)`` to displacements
    from the equilibrium: ``x = equilibrium + transform @ w``.
    """

    alpha0: float
    equilibrium: np.ndarray
    gamma0: float
    beta_prime: float
    transform: np.ndarray
    transform_inv: np.ndarray
    eq_branch: Callable
    system: object

    def eigenvalue(self, alpha):
        x = self.eq_branch(alpha)
        return focus_eigenvalue(jacobian(self.system, x, alpha))

    def beta(self, alpha):
        """Real part of the eigenvalue pair: the unfolding parameter."""
        return self.eigenvalue(alpha).real

    def gamma(self, alpha):
        return self.eigenvalue(alpha).imag

    def to_local(self, x, alpha):
        """Canonical coordinates of ``x`` (shape ``(2,)`` or ``(2, m)``)."""
        eq = self.eq_branch(alpha)
        x = np.asarray(x, dtype=float)
        if x.ndim == 2:
            eq = eq[:, None]
        return self.transform_inv @ (x - eq)

    def from_local(self, w, alpha):
        eq = self.eq_branch(alpha)
        w = np.asarray(w, dtype=float)
        if w.ndim == 2:
            eq = eq[:, None]
        return eq + self.transform @ w

    def canonical_defect(self):
        J = jacobian(self.system, self.equilibrium, self.alpha0)
        C = self.transform_inv @ J @ self.transform
        target = np.array([[0.0, -self.gamma0], [self.gamma0, 0.0]])
        return float(np.max(np.abs(C - target)))


def locate_hopf(system, eq_branch=None, alpha_bracket=None, tol=HOPF_TOL, guess=None) -> HopfData:
    """Bisect ``Re lambda(alpha)`` to the Hopf point and build :class:`HopfData`.

    Parameters
    ----------
    system : ParametricPlanarSystem
    eq_branch : callable, optional
        ``alpha -> equilibrium``.  Defaults to ``system.equilibrium`` or, if
        that is missing, to Newton continuation from ``guess``.
    alpha_bracket : (float, float), optional
        Defaults to ``system.param_range``.
    """
    if eq_branch is None:
        eq_branch = system.equilibrium
    if eq_branch is None:
        eq_branch = continued_branch(system, np.zeros(system.dim) if guess is None else guess)
    lo, hi = system.param_range if alpha_bracket is None else alpha_bracket

    def beta(a):
        return focus_eigenvalue(jacobian(system, eq_branch(a), a)).real

    b_lo, b_hi = beta(lo), beta(hi)
    if np.sign(b_lo) == np.sign(b_hi):
        raise NoHopfInBracketError(f"Re(lambda) does not change sign on [{lo}, {hi}]")
    mid = 0.5 * (lo + hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        b_mid = beta(mid)
        if abs(b_mid) < tol or hi - lo < 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            break
        if np.sign(b_mid) == np.sign(b_lo):
            lo, b_lo = mid, b_mid
        else:
            hi, b_hi = mid, b_mid
    alpha0 = float(mid)
    eq = np.asarray(eq_branch(alpha0), dtype=float)
    J = jacobian(system, eq, alpha0)
    gamma0 = focus_eigenvalue(J).imag
    bp = d_alpha_eigen_real(system, eq_branch, alpha0)
    if not bp > TRANSVERSALITY_TOL:
        raise TransversalityError(f"d Re(lambda)/d alpha = {bp:.3e} at alpha0 = {alpha0}")
    T, Tinv = jordan_transform(J)
    return HopfData(
        alpha0=alpha0,
        equilibrium=eq,
        gamma0=float(gamma0),
        beta_prime=float(bp),
        transform=T,
        transform_inv=Tinv,
        eq_branch=eq_branch,
        system=system,
    )


# Homogeneous coefficient layout: degree-2 terms (u^2, uv, v^2), degree-3 terms
# (u^3, u^2 v, u v^2, v^3).  Coefficients carry the 1/j! Taylor factors.


def _tensor_to_coeffs(t):
    if t.ndim == 3:
        return np.stack([t[:, 0, 0] / 2, t[:, 0, 1], t[:, 1, 1] / 2], axis=1)
    return np.stack([t[:, 0, 0, 0] / 6, t[:, 0, 0, 1] / 2, t[:, 0, 1, 1] / 2, t[:, 1, 1, 1] / 6], axis=1)


def _coeffs_to_tensor(c):
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    if c.shape[1] == 3:
        t = np.empty((n, 2, 2))
        t[:, 0, 0] = 2 * c[:, 0]
        t[:, 0, 1] = t[:, 1, 0] = c[:, 1]
        t[:, 1, 1] = 2 * c[:, 2]
        return t
    t = np.empty((n, 2, 2, 2))
    t[:, 0, 0, 0] = 6 * c[:, 0]
    t[:, 0, 0, 1] = t[:, 0, 1, 0] = t[:, 1, 0, 0] = 2 * c[:, 1]
    t[:, 0, 1, 1] = t[:, 1, 0, 1] = t[:, 1, 1, 0] = 2 * c[:, 2]
    t[:, 1, 1, 1] = 6 * c[:, 3]
    return t


def _change_basis(t, Tinv, T):
    if t.ndim == 3:
        return np.einsum("ij,jkl,ka,lb->iab", Tinv, t, T, T)
    return np.einsum("ij,jklm,ka,lb,mc->iabc", Tinv, t, T, T, T)


@dataclass(frozen=True)
class CubicNormalForm:
    """Quadratic and cubic Taylor coefficients in canonical coordinates.

    ``quad[i]`` holds the coefficients of ``(u^2, uv, v^2)`` in component ``i``;
    ``cubic[i]`` those of ``(u^3, u^2 v, u v^2, v^3)``.  The represented field
    is ``u' = -gamma0 v + ...``, ``v' = gamma0 u + ...``.
    """

    quad: np.ndarray
    cubic: np.ndarray
    gamma0: float

    @classmethod
    def from_coefficients(cls, quad, cubic, gamma0):
        return cls(np.asarray(quad, dtype=float).reshape(2, 3), np.asarray(cubic, dtype=float).reshape(2, 4), float(gamma0))

    def nonlinear(self, w):
        """Quadratic plus cubic part evaluated at ``w`` (shape ``(2,)`` or ``(2, m)``)."""
        u, v = np.asarray(w, dtype=float)
        m2 = np.stack([u * u, u * v, v * v])
        m3 = np.stack([u ** 3, u * u * v, u * v * v, v ** 3])
        return np.tensordot(self.quad, m2, axes=1) + np.tensordot(self.cubic, m3, axes=1)

    def field(self, w, beta=0.0):
        """Truncated field including the linear part ``[[beta, -g], [g, beta]]``."""
        u, v = np.asarray(w, dtype=float)
        g = self.gamma0
        return np.stack([beta * u - g * v, g * u + beta * v]) + self.nonlinear(w)

    def transformed(self, M):
        """Coefficients after the linear change of coordinates ``w = M w'``."""
        M = np.asarray(M, dtype=float)
        Minv = np.linalg.inv(M)
        q = _change_basis(_coeffs_to_tensor(self.quad), Minv, M)
        c = _change_basis(_coeffs_to_tensor(self.cubic), Minv, M)
        return CubicNormalForm(_tensor_to_coeffs(q), _tensor_to_coeffs(c), self.gamma0)

    def rotated(self, phi):
        c, s = np.cos(phi), np.sin(phi)
        return self.transformed(np.array([[c, -s], [s, c]]))


def cubic_normal_form(system, hopf: HopfData) -> CubicNormalForm:
    """Degree-2 and degree-3 Taylor coefficients of ``inv(T) f(x* + T w)``."""
    d2 = derivatives_at(system, hopf.equilibrium, hopf.alpha0, 2).entries
    d3 = derivatives_at(system, hopf.equilibrium, hopf.alpha0, 3).entries
    T, Tinv = hopf.transform, hopf.transform_inv
    quad = _tensor_to_coeffs(_change_basis(d2, Tinv, T))
    cubic = _tensor_to_coeffs(_change_basis(d3, Tinv, T))
    return CubicNormalForm(quad, cubic, hopf.gamma0)
