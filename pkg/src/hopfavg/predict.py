"""Quantitative predictions from the averaged cubic coefficient ``K``.

Near the Hopf point the averaged radial equation reads

    rho' = mu * alpha_t * rho + mu**2 * K * rho**3,    r = mu rho, alpha = mu alpha_t,

with ``alpha`` the real part of the eigenvalue pair.  Choosing ``mu = sqrt|alpha|``
puts the periodic orbit near ``rho0 = |K|**-1/2``, and the ring
``(1 - eps) rho0 < rho < (1 + eps) rho0`` traps it.

``rho`` in that statement is the averaged radius, obtained from the plain
rescaled radius by a near-identity change that removes the angle dependence
of the radial equation; :class:`AveragedRadius` carries it to second order.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .averaging import polar_coefficients
from .errors import BranchMismatchError, DegenerateKError
from .normalize import cubic_normal_form, jordan_transform
from .vectorfield import focus_eigenvalue, jacobian

DEGENERACY_TOL = 1e-6
STABLE = "supercritical-stable"
UNSTABLE = "subcritical-unstable"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class OrbitPrediction:
    """Stability verdict and amplitude law derived from ``K``.

    ``amplitude_fn`` and ``mu`` take the unfolding parameter ``alpha`` (the
    real part of the eigenvalue pair); the ``*_at`` helpers take a value of the
    model's own bifurcation parameter and convert it through ``hopf``.
    """

    K: float
    verdict: str
    rho0: float
    branch_side: int
    gamma0: float
    hopf: object = None

    @property
    def degenerate(self):
        return self.verdict == DEGENERATE

    def _check(self, alpha):
        if self.degenerate:
            raise DegenerateKError(f"|K| = {abs(self.K):.3e} below the degeneracy threshold")
        if alpha != 0 and np.sign(alpha) != self.branch_side:
            raise BranchMismatchError(
                f"alpha = {alpha:.6g} is not on the {'positive' if self.branch_side > 0 else 'negative'} branch side")

    def amplitude_fn(self, alpha):
        """Orbit radius in canonical coordinates, ``sqrt(|alpha| / |K|)``."""
        self._check(alpha)
        return float(np.sqrt(abs(alpha)) * self.rho0)

    def unfolding(self, param):
        return float(self.hopf.beta(param))

    def amplitude_at(self, param):
        return self.amplitude_fn(self.unfolding(param))

    def period_estimate(self, param):
        return float(2 * np.pi / self.hopf.gamma(param))

    @property
    def time_direction(self):
        """+1 when the orbit attracts forward in time, -1 otherwise."""
        return 1 if self.K < 0 else -1


def predict(K, hopf, degeneracy_tol=DEGENERACY_TOL) -> OrbitPrediction:
    """Turn ``K`` into a verdict, ``rho0`` and the branch side."""
    K = float(K)
    gamma0 = float(hopf.gamma0) if hopf is not None else float("nan")
    if abs(K) < degeneracy_tol:
        return OrbitPrediction(K, DEGENERATE, float("nan"), 0, gamma0, hopf)
    if K < 0:
        return OrbitPrediction(K, STABLE, abs(K) ** -0.5, 1, gamma0, hopf)
    return OrbitPrediction(K, UNSTABLE, abs(K) ** -0.5, -1, gamma0, hopf)


def auto_epsilon(mu, c_eps=0.5, lo=0.05, hi=0.5):
    return float(np.clip(c_eps * np.sqrt(mu), lo, hi))

FOURIER_GRID = 64


def _zero_mean_antiderivative(values):
    """rfft coefficients of the zero-mean antiderivative of grid samples."""
    n = values.size
    c = np.fft.rfft(values) / n
    k = np.arange(c.size)
    out = np.zeros_like(c)
    out[1:] = c[1:] / (1j * k[1:])
    return out


def _eval_rfft(c, theta):
    theta = np.asarray(theta, dtype=float)
    k = np.arange(1, c.size)
    return c[0].real + 2.0 * np.real(np.exp(1j * np.multiply.outer(theta, k)) @ c[1:])


@dataclass(frozen=True)
class AveragedRadius:
    """Polar coordinates in which the radial equation is angle-free to second order.

    With ``w = inv(T) (x - center) = r (cos t, sin t)`` in the eigenframe at
    the working parameter and ``rho = r / mu``::

        rho_avg = rho + mu rho**2 U(t) + mu**2 rho**3 V(t)
        g U' = -C3,   g V' = -(G - <G>),   G = C4 + 2 U C3 - C3 D3 / g

    so that ``rho_avg' = mu**2 (sign(alpha) rho_avg + <G> rho_avg**3) + O(mu**3)``.
    ``order`` keeps the first ``order`` correction terms (0 gives plain ``rho``).
    """

    center: np.ndarray
    transform: np.ndarray
    transform_inv: np.ndarray
    mu: float
    gamma: float
    u_coef: np.ndarray
    v_coef: np.ndarray
    K_local: float
    order: int = 2

    def U(self, theta):
        return _eval_rfft(self.u_coef, theta) if self.order >= 1 else np.zeros_like(np.asarray(theta, dtype=float))

    def V(self, theta):
        return _eval_rfft(self.v_coef, theta) if self.order >= 2 else np.zeros_like(np.asarray(theta, dtype=float))

    def polar(self, x):
        """``(rho_avg, theta)`` of model-coordinate points (shape ``(n,)`` or ``(n, m)``)."""
        x = np.asarray(x, dtype=float)
        c = self.center if x.ndim == 1 else self.center[:, None]
        w = self.transform_inv @ (x - c)
        theta = np.arctan2(w[1], w[0])
        rho = np.hypot(w[0], w[1]) / self.mu
        return rho + self.mu * rho ** 2 * self.U(theta) + self.mu ** 2 * rho ** 3 * self.V(theta), theta

    def plain_rho(self, rho_avg, theta):
        """Invert the near-identity change by Newton's method."""
        rho_avg, theta = np.broadcast_arrays(np.asarray(rho_avg, dtype=float), np.asarray(theta, dtype=float))
        a, b = self.mu * self.U(theta), self.mu ** 2 * self.V(theta)
        rho = rho_avg.copy()
        for _ in range(50):
            g = rho + a * rho ** 2 + b * rho ** 3 - rho_avg
            step = g / (1 + 2 * a * rho + 3 * b * rho ** 2)
            rho = rho - step
            if np.all(np.abs(step) <= 1e-15 * np.maximum(1.0, np.abs(rho))):
                break
        return rho

    def to_original(self, rho_avg, theta):
        rho = self.plain_rho(rho_avg, theta)
        theta = np.broadcast_to(np.asarray(theta, dtype=float), rho.shape)
        w = self.mu * np.stack([rho * np.cos(theta), rho * np.sin(theta)])
        return self.center.reshape(2, *([1] * rho.ndim)) + np.tensordot(self.transform, w, axes=1)


def averaged_radius(hopf, param, mu, order=2, n=FOURIER_GRID) -> AveragedRadius:
    """Build :class:`AveragedRadius` from the Taylor data at ``param``.

    The frame is the real Jordan basis of the Jacobian at the equilibrium for
    ``param``, so the linear part there is exactly ``[[b, -g], [g, b]]``.
    """
    system = hopf.system
    center = np.asarray(hopf.eq_branch(param), dtype=float)
    J = jacobian(system, center, param)
    T, Tinv = jordan_transform(J)
    g = float(focus_eigenvalue(J).imag)
    local = replace(hopf, alpha0=float(param), equilibrium=center, transform=T, transform_inv=Tinv, gamma0=g)
    pc = polar_coefficients(cubic_normal_form(system, local))
    theta = 2 * np.pi * np.arange(n) / n
    C3, C4, D3 = pc.C3(theta), pc.C4(theta), pc.D3(theta)
    u_coef = _zero_mean_antiderivative(-C3 / g)
    G = C4 + 2 * _eval_rfft(u_coef, theta) * C3 - C3 * D3 / g
    v_coef = _zero_mean_antiderivative(-(G - G.mean()) / g)
    return AveragedRadius(center, T, Tinv, float(mu), g, u_coef, v_coef, float(G.mean()), int(order))


@dataclass(frozen=True)
class Annulus:
    """Trapping ring in averaged rescaled radius around the equilibrium at ``param``.

    Radii ``inner_r`` and ``outer_r`` are in rescaled units; ``frame`` maps
    between model coordinates and ``(rho_avg, theta)``.
    """

    center: np.ndarray
    inner_r: float
    outer_r: float
    epsilon: float
    alpha: float
    param: float
    mu: float
    rho0: float
    K: float
    hopf: object
    frame: AveragedRadius

    def to_original(self, rho, theta):
        """Points with averaged polar coordinates ``(rho, theta)`` in model coordinates."""
        return self.frame.to_original(rho, theta)

    def from_original(self, x):
        """Averaged polar coordinates ``(rho, theta)`` of model-coordinate points."""
        return self.frame.polar(x)

    def curve(self, rho, n=256):
        theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return self.to_original(np.full(n, rho), theta)

    @property
    def inner_curve(self):
        return self.curve(self.inner_r)

    @property
    def outer_curve(self):
        return self.curve(self.outer_r)

    def contains(self, x):
        rho, _ = self.from_original(x)
        return (rho > self.inner_r) & (rho < self.outer_r)

    def inflated(self, factor):
        """Radii of the ring whose half-width is ``factor`` times larger."""
        return self.rho0 * (1 - factor * self.epsilon), self.rho0 * (1 + factor * self.epsilon)

    def boundary_rates(self, n=256):
        """Truncated averaged radial rate on the inner and outer circles.

        Returns ``(theta, inner_rates, outer_rates)``.  The averaged rate does
        not depend on the angle; it is sampled at ``n`` angles so the sign
        test runs on the same grid as the boundary curves.
        """
        theta = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        alpha_t = self.alpha / self.mu

        def rate(rho):
            return np.full(n, self.mu * alpha_t * rho + self.mu ** 2 * self.K * rho ** 3)

        return theta, rate(self.inner_r), rate(self.outer_r)

    def boundary_signs_ok(self, n=256):
        """Inward flow for ``K < 0`` (positive invariance), outward for ``K > 0``."""
        _, inner, outer = self.boundary_rates(n)
        if self.K < 0:
            return bool(np.all(inner > 0) and np.all(outer < 0))
        return bool(np.all(inner < 0) and np.all(outer > 0))


def winding_number(curve, center):
    """Winding number of a closed polygon (columns of ``curve``) about ``center``."""
    d = np.asarray(curve, dtype=float) - np.asarray(center, dtype=float).reshape(2, 1)
    ang = np.unwrap(np.arctan2(d[1], d[0]))
    total = ang[-1] - ang[0] + np.angle(complex(*d[:, 0]) / complex(*d[:, -1]))
    return int(round(total / (2 * np.pi)))


def build_annulus(pred: OrbitPrediction, hopf, param, epsilon="auto", c_eps=0.5, order=2) -> Annulus:
    """Trapping ring for the bifurcation-parameter value ``param``.

    ``epsilon="auto"`` uses ``0.5 sqrt(mu)`` clamped to ``[0.05, 0.5]``.
    ``order`` selects how many near-identity correction terms define the
    averaged radius (see :class:`AveragedRadius`).
    """
    if pred.degenerate:
        raise DegenerateKError("no annulus for a degenerate K")
    alpha = float(hopf.beta(param))
    if alpha == 0 or np.sign(alpha) != pred.branch_side:
        raise BranchMismatchError(f"unfolding parameter {alpha:.6g} at {param} is on the wrong side")
    mu = float(np.sqrt(abs(alpha)))
    if isinstance(epsilon, str):
        if epsilon != "auto":
            raise ValueError("epsilon must be a number in (0, 1) or 'auto'")
        eps = auto_epsilon(mu, c_eps)
    else:
        eps = float(epsilon)
        if not 0 < eps < 1:
            raise ValueError("epsilon must lie in (0, 1)")
    return Annulus(
        center=np.asarray(hopf.eq_branch(param), dtype=float),
        inner_r=(1 - eps) * pred.rho0,
        outer_r=(1 + eps) * pred.rho0,
        epsilon=eps,
        alpha=alpha,
        param=float(param),
        mu=mu,
        rho0=pred.rho0,
        K=pred.K,
        hopf=hopf,
        frame=averaged_radius(hopf, param, mu, order=order),
    )
