"""Integral averages over the angle and over a forcing period.

Two families of tools live here:

* the polar machinery for an autonomous planar field in canonical
  coordinates: homogeneous trigonometric polynomials, the radial and angular
  coefficient polynomials, and the averaged cubic coefficient ``K``;
* the classical averaging operator for ``x' = alpha f(t, x, alpha)`` with
  ``f`` periodic in ``t``, together with a shooting solver that checks its
  predictions.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial
from typing import Callable, Union

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.integrate import quad, quad_vec, simpson

from .errors import HyperbolicityError, InternalConsistencyError, QuadratureError
from .integrate import integrate
from .vectorfield import PeriodicSystem


def trig_moment(i, j):
    """Mean of ``cos(t)**i * sin(t)**j`` over one period, exactly."""
    if i % 2 or j % 2:
        return 0.0
    m, n = i // 2, j // 2
    return factorial(2 * m) * factorial(2 * n) / (4 ** (m + n) * factorial(m) * factorial(n) * factorial(m + n))


class TrigPoly:
    """Homogeneous polynomial of degree ``d`` in ``(cos t, sin t)``.

    ``coeffs[j]`` multiplies ``cos(t)**(d - j) * sin(t)**j``.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float)).copy()
        self.coeffs.setflags(write=False)

    @property
    def degree(self):
        return self.coeffs.size - 1

    @classmethod
    def zero(cls, degree):
        return cls(np.zeros(degree + 1))

    @classmethod
    def constant(cls, value, degree):
        """``value * (cos^2 + sin^2)**(degree/2)``, i.e. a constant function."""
        if degree % 2:
            raise ValueError("a nonzero constant needs even degree")
        c = np.array([1.0])
        for _ in range(degree // 2):
            c = np.convolve(c, [1.0, 0.0, 1.0])
        return cls(value * c)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        c, s = np.cos(theta), np.sin(theta)
        d = self.degree
        return sum(a * c ** (d - j) * s ** j for j, a in enumerate(self.coeffs))

    def __add__(self, other):
        if isinstance(other, TrigPoly):
            if other.degree != self.degree:
                raise ValueError("degrees differ")
            return TrigPoly(self.coeffs + other.coeffs)
        return NotImplemented

    def __sub__(self, other):
        return self + (-1.0) * other

    def __mul__(self, other):
        if isinstance(other, TrigPoly):
            return TrigPoly(np.convolve(self.coeffs, other.coeffs))
        return TrigPoly(self.coeffs * float(other))

    __rmul__ = __mul__

    def __neg__(self):
        return TrigPoly(-self.coeffs)

    def __repr__(self):
        return f"TrigPoly({self.coeffs.tolist()})"

    def times_cos(self):
        return TrigPoly(np.append(self.coeffs, 0.0))

    def times_sin(self):
        return TrigPoly(np.insert(self.coeffs, 0, 0.0))

    def mean(self):
        """Exact mean over ``[0, 2 pi]`` by trigonometric moments."""
        d = self.degree
        return float(sum(a * trig_moment(d - j, j) for j, a in enumerate(self.coeffs)))

    def mean_simpson(self, n=1024):
        theta = np.linspace(0.0, 2 * np.pi, n + 1)
        return float(simpson(self(theta), x=theta) / (2 * np.pi))

    def fourier(self):
        """Coefficients ``c_k`` of ``exp(i k t)`` for ``k = -d..d``."""
        d = self.degree
        zc = np.array([0.5, 0.0, 0.5], dtype=complex)  # z*cos = (1 + z^2)/2
        zs = np.array([-0.5, 0.0, 0.5], dtype=complex) / 1j  # z*sin = (z^2 - 1)/2i
        out = np.zeros(2 * d + 1, dtype=complex)
        for j, a in enumerate(self.coeffs):
            if a == 0.0:
                continue
            term = np.array([1.0 + 0j])
            for _ in range(d - j):
                term = P.polymul(term, zc)
            for _ in range(j):
                term = P.polymul(term, zs)
            out[: term.size] += a * term
        return out

    def periodic_antiderivative(self):
        """``F`` with ``F' = self - mean`` and ``F(0) = 0``; exactly periodic."""
        c = self.fourier()
        d = self.degree
        k = np.arange(-d, d + 1)
        nz = k != 0
        ck, kk = c[nz], k[nz]

        def F(theta):
            theta = np.asarray(theta, dtype=float)
            e = np.exp(1j * np.multiply.outer(theta, kk))
            return np.real(e @ (ck / (1j * kk)) - np.sum(ck / (1j * kk)))

        return F


@dataclass(frozen=True)
class PolarCoefficients:
    """Radial and angular coefficient polynomials of a cubic normal form.

    With ``u = r cos t``, ``v = r sin t``::

        r' = beta r + r^2 C3(t) + r^3 C4(t) + O(r^4)
        t' = gamma0 + r D3(t) + O(r^2)
    """

    C3: TrigPoly
    C4: TrigPoly
    D3: TrigPoly
    gamma0: float


def polar_coefficients(nf) -> PolarCoefficients:
    """Build ``C3``, ``C4`` and ``D3`` from a :class:`CubicNormalForm`.

    ``D3`` follows from ``r t' = v' cos t - u' sin t``.
    """
    B12, B22 = TrigPoly(nf.quad[0]), TrigPoly(nf.quad[1])
    B13, B23 = TrigPoly(nf.cubic[0]), TrigPoly(nf.cubic[1])
    C3 = B12.times_cos() + B22.times_sin()
    C4 = B13.times_cos() + B23.times_sin()
    D3 = B22.times_cos() - B12.times_sin()
    return PolarCoefficients(C3=C3, C4=C4, D3=D3, gamma0=float(nf.gamma0))


def average_K(pc: PolarCoefficients, return_both=False, n_simpson=1024, rtol=1e-10):
    """Averaged cubic coefficient ``K = <C4 - C3 D3 / gamma0>``.

    The mean is taken twice, with exact trigonometric moments and with
    composite Simpson quadrature; disagreement beyond ``rtol`` (relative to
    the coefficient scale) raises :class:`InternalConsistencyError`.
    """
    if not pc.gamma0 > 0:
        raise ValueError("gamma0 must be positive")
    cross = pc.C3 * pc.D3
    k_moment = pc.C4.mean() - cross.mean() / pc.gamma0
    theta = np.linspace(0.0, 2 * np.pi, n_simpson + 1)
    integrand = pc.C4(theta) - pc.C3(theta) * pc.D3(theta) / pc.gamma0
    k_simpson = float(simpson(integrand, x=theta) / (2 * np.pi))
    scale = max(1.0, float(np.sum(np.abs(pc.C4.coeffs)) + np.sum(np.abs(cross.coeffs)) / pc.gamma0))
    if abs(k_moment - k_simpson) > rtol * scale:
        raise InternalConsistencyError(f"K by moments {k_moment!r} vs Simpson {k_simpson!r}")
    if return_both:
        return k_moment, k_simpson
    return k_moment


def averaging_b_function(A: Union[TrigPoly, Callable], w):
    """Near-identity correction that removes the angle dependence of ``A``.

    Returns ``(b, A_bar)`` where ``A_bar`` is the mean of ``A`` and

        b(t) = -(1/w) int_0^t A ds + (t / (2 pi w)) int_0^{2 pi} A ds,

    so that ``A + w db/dt = A_bar`` and ``b`` is ``2 pi``-periodic.
    """
    if w == 0:
        raise ValueError("w must be nonzero")
    if isinstance(A, TrigPoly):
        A_bar = A.mean()
        F = A.periodic_antiderivative()
        return (lambda theta: -F(theta) / w), A_bar

    A_bar = quad(A, 0.0, 2 * np.pi, epsabs=1e-13, epsrel=1e-13, limit=200)[0] / (2 * np.pi)

    def b(theta):
        def one(t):
            return -(quad(A, 0.0, t, epsabs=1e-13, epsrel=1e-13, limit=200)[0] - t * A_bar) / w

        theta = np.asarray(theta, dtype=float)
        if theta.ndim == 0:
            return one(float(theta))
        return np.array([one(t) for t in theta.ravel()]).reshape(theta.shape)

    return b, A_bar


def u1_hopf(theta, beta, gamma):
    """First coefficient of the radial return-map expansion, ``exp(theta beta / gamma)``."""
    if gamma == 0:
        raise ValueError("gamma must be nonzero")
    return np.exp(np.asarray(theta) * beta / gamma)


@dataclass(frozen=True)
class AveragedSystem:
    f0: Callable
    period: float
    source: PeriodicSystem

    def __call__(self, x):
        return self.f0(x)


def average_system(ps: PeriodicSystem, epsabs=1e-9) -> AveragedSystem:
    """Period mean ``f0(x) = (1/T) int_0^T f(t, x, 0) dt`` by adaptive quadrature."""
    T = ps.period

    def f0(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        val, err, info = quad_vec(lambda t: np.atleast_1d(ps.eval(t, x, 0.0)), 0.0, T,
                                  epsabs=epsabs * T, epsrel=1e-12, full_output=True)
        if not info.success or err > 10 * epsabs * T:
            raise QuadratureError(f"period average did not converge at x={x} (err {err:.2e})")
        return val / T

    return AveragedSystem(f0=f0, period=T, source=ps)


def _fd_jacobian(F, x, h=1e-6):
    x = np.atleast_1d(np.asarray(x, dtype=float))
    f = np.atleast_1d(F(x))
    J = np.empty((f.size, x.size))
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h * max(1.0, abs(x[j]))
        J[:, j] = (np.atleast_1d(F(x + e)) - np.atleast_1d(F(x - e))) / (2 * e[j])
    return J


def averaged_periodic_predict(ps, avg, alpha, guess, tol=1e-12, max_iter=50):
    """Hyperbolic zero of the averaged field and the predicted stability.

    Returns
    -------
    y_star : ndarray
    verdict : {"stable", "unstable"}
        Stability inherited by the ``T``-periodic solution of
        ``x' = alpha f(t, x, alpha)`` for small ``alpha > 0``.
    """
    y = np.atleast_1d(np.asarray(guess, dtype=float)).copy()
    for _ in range(max_iter):
        fy = np.atleast_1d(avg(y))
        if np.linalg.norm(fy) < tol:
            break
        y = y - np.linalg.solve(_fd_jacobian(avg, y), fy)
    else:
        raise HyperbolicityError("Newton on the averaged field did not converge")
    ev = np.linalg.eigvals(_fd_jacobian(avg, y))
    if np.any(np.abs(ev.real) < 1e-8):
        raise HyperbolicityError(f"averaged equilibrium is not hyperbolic: {ev}")
    verdict = "stable" if np.all(ev.real < 0) else "unstable"
    if alpha < 0:
        verdict = "unstable" if verdict == "stable" else "stable"
    return y, verdict


@dataclass(frozen=True)
class PeriodicSolution:
    x0: np.ndarray
    period: float
    residual: float
    trajectory: object

    def sup_distance(self, y, n=512):
        _, xs = self.trajectory.sample(n)
        return float(np.max(np.linalg.norm(xs - np.reshape(y, (-1, 1)), axis=0)))


def shoot_periodic(ps: PeriodicSystem, alpha, guess, tol=(1e-13, 1e-11), max_iter=30, target=1e-10):
    """Newton shooting for ``x(T; x0) = x0`` of ``x' = alpha f(t, x, alpha)``."""
    T = ps.period
    x = np.atleast_1d(np.asarray(guess, dtype=float)).copy()

    def G(x0):
        return integrate(ps, x0, alpha, (0.0, T), tol=tol).final - x0

    for _ in range(max_iter):
        g = G(x)
        if np.linalg.norm(g) < target:
            break
        x = x - np.linalg.solve(_fd_jacobian(G, x, h=1e-5), g)
    traj = integrate(ps, x, alpha, (0.0, T), tol=tol)
    res = float(np.linalg.norm(traj.final - x))
    return PeriodicSolution(x0=x, period=T, residual=res, trajectory=traj)
