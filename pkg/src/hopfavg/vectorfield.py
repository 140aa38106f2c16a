"""Parametric vector fields and finite-difference Taylor data.

Every analysis in the package consumes a :class:`ParametricSystem`: a pure
function ``f(x, alpha)`` plus a little metadata.  Derivatives with respect to
the state are obtained with tensor-product central difference stencils and one
Richardson extrapolation step, so no symbolic machinery is needed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from .errors import EvaluationDomainError, NotAFocusError

Array = np.ndarray

# central stencils (offsets, weights) for the m-th derivative, O(h^2) accurate
_STENCILS = {
    1: ((-1, 1), (-0.5, 0.5)),
    2: ((-1, 0, 1), (1.0, -2.0, 1.0)),
    3: ((-2, -1, 1, 2), (-0.5, 1.0, -1.0, 0.5)),
}

# base step per derivative order; larger steps for higher orders keep the
# roundoff term eps/h**order below the truncation term
DEFAULT_STEPS = {1: 1e-4, 2: 1e-3, 3: 1e-2}


@dataclass(frozen=True)
class ParametricSystem:
    """Autonomous vector field ``x' = f(x, alpha)`` in ``dim`` dimensions.

    Parameters
    ----------
    fn : callable
        ``fn(x, alpha) -> dx/dt``.  Models shipped with the package accept
        ``x`` of shape ``(dim,)`` or ``(dim, m)`` (a batch of ``m`` states).
    dim : int
        State dimension.
    param_range : (float, float)
        Closed interval of admissible parameter values.
    label : str
        Identifier used in reports.
    param_name : str
        Name of the bifurcation parameter (``"alpha"``, ``"k"``, ...).
    equilibrium : callable, optional
        ``alpha -> x*`` branch of equilibria, when known in closed form.
    bounds : (lower, upper), optional
        Bounding box inside which ``fn`` is guaranteed finite.
    """

    fn: Callable[[Array, float], Array]
    dim: int = 2
    param_range: Tuple[float, float] = (-np.inf, np.inf)
    label: str = "system"
    param_name: str = "alpha"
    equilibrium: Optional[Callable[[float], Array]] = None
    bounds: Optional[Tuple[Sequence[float], Sequence[float]]] = None
    meta: dict = field(default_factory=dict, compare=False)

    def __call__(self, x, alpha):
        return self.eval(x, alpha)

    def eval(self, x, alpha) -> Array:
        return np.asarray(self.fn(np.asarray(x, dtype=float), alpha), dtype=float)

    def rhs(self, alpha, sign=1.0):
        """Return ``(t, x) -> sign * f(x, alpha)`` for ODE solvers."""
        if sign == 1.0:
            return lambda t, x: self.eval(x, alpha)
        return lambda t, x: sign * self.eval(x, alpha)

    def in_bounds(self, x) -> bool:
        if self.bounds is None:
            return True
        lo, hi = (np.asarray(b, dtype=float) for b in self.bounds)
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= lo) and np.all(x <= hi))


@dataclass(frozen=True)
class ParametricPlanarSystem(ParametricSystem):
    """A :class:`ParametricSystem` restricted to the plane."""

    def __post_init__(self):
        if self.dim != 2:
            raise ValueError("planar systems have dim == 2")


@dataclass(frozen=True)
class PeriodicSystem:
    """Slow periodic field ``x' = alpha f(t, x, alpha)``, ``f`` periodic in ``t``.

    ``fn`` returns ``f`` itself; integrators multiply by ``alpha``.
    """

    fn: Callable[[float, Array, float], Array]
    period: float
    dim: int = 1
    label: str = "periodic"

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("period must be positive")

    def eval(self, t, x, alpha) -> Array:
        return np.asarray(self.fn(t, np.asarray(x, dtype=float), alpha), dtype=float)


@dataclass(frozen=True)
class DerivativeTensor:
    """All ``order``-th partial derivatives of ``f`` at a point.

    ``entries[i, j1, ..., jk]`` is ``d^k f_i / dx_j1 ... dx_jk``.
    """

    order: int
    entries: Array
    point: Array
    alpha: float

    def __getitem__(self, idx):
        return self.entries[idx]

    def symmetry_defect(self) -> float:
        """Largest relative deviation from index-permutation symmetry."""
        e = self.entries
        scale = max(1.0, float(np.max(np.abs(e))))
        worst = 0.0
        for perm in itertools.permutations(range(1, self.order + 1)):
            worst = max(worst, float(np.max(np.abs(e - e.transpose((0,) + perm)))))
        return worst / scale


def _mixed_partial(f, x0, multi, h):
    """Mixed partial of every component of ``f`` for a sorted multi-index."""
    dirs = sorted(set(multi))
    mults = [multi.count(d) for d in dirs]
    stencils = [_STENCILS[m] for m in mults]
    acc = 0.0
    for combo in itertools.product(*(range(len(s[0])) for s in stencils)):
        x = x0.copy()
        w = 1.0
        for d, s, c in zip(dirs, stencils, combo):
            x[d] += s[0][c] * h[d]
            w *= s[1][c]
        val = f(x)
        if not np.all(np.isfinite(val)):
            raise EvaluationDomainError(f"non-finite field value at {x}")
        acc = acc + w * val
    denom = 1.0
    for d, m in zip(dirs, mults):
        denom *= h[d] ** m
    return acc / denom


def derivatives_at(system, point, alpha, order, step=None) -> DerivativeTensor:
    """Finite-difference derivative tensor of ``system`` at ``point``.

    Nested central differences with steps ``h`` and ``h/2`` are combined by
    Richardson extrapolation, which makes the result exact (up to roundoff)
    for polynomial fields of degree at most ``order + 3``.

    Parameters
    ----------
    system : ParametricSystem
    point : array_like
    alpha : float
    order : {1, 2, 3}
    step : float, optional
        Base step; defaults to :data:`DEFAULT_STEPS` for the order.  The
        actual step in coordinate ``j`` is ``step * max(1, |x_j|)``.
    """
    if order not in _STENCILS:
        raise ValueError("order must be 1, 2 or 3")
    x0 = np.asarray(point, dtype=float).copy()
    if not system.in_bounds(x0):
        raise EvaluationDomainError(f"point {x0} outside the declared bounding box")
    n = x0.size
    base = DEFAULT_STEPS[order] if step is None else step
    h = base * np.maximum(1.0, np.abs(x0))

    def f(x):
        return system.eval(x, alpha)

    entries = np.empty((n,) + (n,) * order)
    for multi in itertools.combinations_with_replacement(range(n), order):
        coarse = _mixed_partial(f, x0, multi, h)
        fine = _mixed_partial(f, x0, multi, h / 2)
        val = (4.0 * fine - coarse) / 3.0
        for perm in set(itertools.permutations(multi)):
            entries[(slice(None),) + perm] = val
    return DerivativeTensor(order=order, entries=entries, point=x0, alpha=alpha)


def jet(system, point, alpha, order=3):
    """Derivative tensors of orders ``1..order`` at ``point``."""
    return tuple(derivatives_at(system, point, alpha, k) for k in range(1, order + 1))


def jacobian(system, point, alpha) -> Array:
    return derivatives_at(system, point, alpha, 1).entries


def focus_eigenvalue(J) -> complex:
    """Eigenvalue with positive imaginary part of a 2x2 (or larger) matrix.

    Raises :class:`NotAFocusError` when the spectrum has no complex pair.
    """
    ev = np.linalg.eigvals(np.asarray(J, dtype=float))
    scale = max(1.0, float(np.max(np.abs(ev))))
    cplx = ev[np.abs(ev.imag) > 1e-12 * scale]
    if cplx.size == 0:
        raise NotAFocusError(f"eigenvalues {ev} are real")
    lam = cplx[np.argmax(cplx.imag)]
    return complex(lam.real, abs(lam.imag))


def eigen_real_part(system, equilibrium_branch, alpha) -> float:
    """Real part of the complex eigenvalue pair along an equilibrium branch."""
    x = equilibrium_branch(alpha)
    return focus_eigenvalue(jacobian(system, x, alpha)).real


def d_alpha_eigen_real(system, equilibrium_branch, alpha0, rtol=1e-9, max_levels=6) -> float:
    """Derivative of ``Re lambda(alpha)`` at ``alpha0``.

    Central differences in ``alpha`` are Richardson-extrapolated on a halving
    sequence of steps until two successive extrapolants agree to ``rtol``.
    """

    def beta(a):
        return eigen_real_part(system, equilibrium_branch, a)

    h = 1e-3 * max(1.0, abs(alpha0))
    prev_d = (beta(alpha0 + h) - beta(alpha0 - h)) / (2 * h)
    prev_r = None
    for _ in range(max_levels):
        h /= 2
        d = (beta(alpha0 + h) - beta(alpha0 - h)) / (2 * h)
        r = (4 * d - prev_d) / 3
        if prev_r is not None and abs(r - prev_r) <= rtol * max(1.0, abs(r)):
            return float(r)
        prev_d, prev_r = d, r
    return float(prev_r)
