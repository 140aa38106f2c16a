"""Model registry: synthetic Hopf families and the two-predator, one-prey model.

The ecological model is

    S'  = gamma S (1 - S/k) - m1 x1 S/(a + S) - m2 x2 S/(a + S)
    x1' = m1 x1 S/(a + S) - d1 x1
    x2' = m2 x2 S/(a + S) - d2 x2

with equal semi-saturation constants and equal break-even prey densities
``lambda = a d_i / (m_i - d_i)``.  Then ``m2 = rho m1``, ``d2 = rho d1`` and
``x2 / x1**rho`` is a constant of motion, so each level set ``x2 = c x1**rho``
carries a planar system in ``(S, x1)`` with the carrying capacity ``k`` as
bifurcation parameter.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, Optional

import numpy as np

from .errors import InvalidParametersError, NoCoexistenceError
from .integrate import integrate
from .normalize import CubicNormalForm
from .vectorfield import ParametricPlanarSystem, ParametricSystem


# ---------------------------------------------------------------- synthetic


def make_normal_form_family(sigma=-1.0, gamma0=1.0) -> ParametricPlanarSystem:
    """``x' = a x - g y + s x r^2``, ``y' = g x + a y + s y r^2``; ``K = s``."""
    if not gamma0 > 0:
        raise InvalidParametersError("gamma0 must be positive")
    s, g = float(sigma), float(gamma0)

    def fn(x, a):
        r2 = x[0] ** 2 + x[1] ** 2
        return np.stack([a * x[0] - g * x[1] + s * x[0] * r2, g * x[0] + a * x[1] + s * x[1] * r2])

    def jac(x, a):
        u, v = x
        return np.array([[a + s * (3 * u * u + v * v), -g + 2 * s * u * v],
                         [g + 2 * s * u * v, a + s * (u * u + 3 * v * v)]])

    return ParametricPlanarSystem(
        fn=fn, param_range=(-0.5, 0.5), label=f"normal-form(sigma={s:+g}, gamma0={g:g})",
        equilibrium=lambda a: np.zeros(2), meta={"known_K": s, "jac": jac},
    )


@dataclass(frozen=True)
class SyntheticHopfFamily:
    """Canonical linear part ``[[a, -g], [g, a]]`` plus fixed quadratic/cubic terms.

    Coefficient layout follows :class:`~hopfavg.normalize.CubicNormalForm`.
    """

    quad: np.ndarray
    cubic: np.ndarray
    gamma0: float
    known_K: Optional[float] = None
    label: str = "synthetic"

    @property
    def normal_form(self):
        return CubicNormalForm.from_coefficients(self.quad, self.cubic, self.gamma0)

    def system(self) -> ParametricPlanarSystem:
        g = float(self.gamma0)
        (q0, q1, q2), (q3, q4, q5) = np.asarray(self.quad, dtype=float).reshape(2, 3).tolist()
        (c0, c1, c2, c3), (c4, c5, c6, c7) = np.asarray(self.cubic, dtype=float).reshape(2, 4).tolist()

        def fn(x, a):
            u, v = x[0], x[1]
            uu, uv, vv = u * u, u * v, v * v
            return np.stack([
                a * u - g * v + q0 * uu + q1 * uv + q2 * vv + u * (c0 * uu + c1 * uv + c2 * vv) + c3 * v * vv,
                g * u + a * v + q3 * uu + q4 * uv + q5 * vv + u * (c4 * uu + c5 * uv + c6 * vv) + c7 * v * vv,
            ])

        def jac(x, a):
            u, v = x
            return np.array([
                [a + 2 * q0 * u + q1 * v + 3 * c0 * u * u + 2 * c1 * u * v + c2 * v * v,
                 -g + q1 * u + 2 * q2 * v + c1 * u * u + 2 * c2 * u * v + 3 * c3 * v * v],
                [g + 2 * q3 * u + q4 * v + 3 * c4 * u * u + 2 * c5 * u * v + c6 * v * v,
                 a + q4 * u + 2 * q5 * v + c5 * u * u + 2 * c6 * u * v + 3 * c7 * v * v],
            ])

        return ParametricPlanarSystem(
            fn=fn, param_range=(-0.5, 0.5), label=self.label,
            equilibrium=lambda a: np.zeros(2), meta={"known_K": self.known_K, "jac": jac},
        )


def cubic_test_family(gamma0=1.0) -> SyntheticHopfFamily:
    """``x' = a x - g y - x^3``, ``y' = g x + a y``: ``K = -<cos^4> = -3/8``."""
    cubic = np.zeros((2, 4))
    cubic[0, 0] = -1.0
    return SyntheticHopfFamily(np.zeros((2, 3)), cubic, gamma0, known_K=-3.0 / 8.0, label="cubic-test")


def random_quad_cubic(rng, gamma_range=(0.5, 2.0), scale=1.0) -> SyntheticHopfFamily:
    """Quadratic and cubic coefficients drawn uniformly from ``[-scale, scale]``."""
    quad = rng.uniform(-scale, scale, size=(2, 3))
    cubic = rng.uniform(-scale, scale, size=(2, 4))
    g = rng.uniform(*gamma_range)
    return SyntheticHopfFamily(quad, cubic, g, label="quad-cubic-random")


def random_quad_cubic_families(n, seed=42, **kw):
    rng = np.random.default_rng(seed)
    return [random_quad_cubic(rng, **kw) for _ in range(n)]


# -------------------------------------------------------------- predator-prey


@dataclass(frozen=True)
class PredatorPreyParams:
    """Parameters of the two-predator, one-prey chemostat-type model.

    Attributes
    ----------
    gamma : prey intrinsic growth rate [1/time]
    k : prey carrying capacity [biomass]; the bifurcation parameter
    a : common semi-saturation constant [biomass]
    m1 : maximal birth rate of predator 1 [1/time]
    d1 : death rate of predator 1 [1/time]
    rho : ratio ``m2/m1 = d2/d1`` [-]
    c : invariant level ``x2 = c x1**rho`` [biomass**(1 - rho)]
    """

    gamma: float = 1.0
    k: float = 3.0
    a: float = 1.0
    m1: float = 2.0
    d1: float = 1.0
    rho: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not (self.gamma > 0 and self.a > 0 and self.m1 > 0 and self.d1 > 0):
            raise InvalidParametersError("gamma, a, m1, d1 must be positive")
        if not self.b > 1:
            raise InvalidParametersError(f"need b = m1/d1 > 1, got {self.b}")
        if not 0 < self.lam < self.k:
            raise InvalidParametersError(f"need 0 < lambda < k, got lambda={self.lam}, k={self.k}")
        if not self.rho >= 1:
            raise InvalidParametersError("need rho >= 1")
        if not self.c >= 0:
            raise InvalidParametersError("need c >= 0")

    @property
    def b(self):
        return self.m1 / self.d1

    @property
    def beta1(self):
        return self.m1 - self.d1

    @property
    def lam(self):
        return self.a / (self.b - 1.0)

    @property
    def m2(self):
        return self.rho * self.m1

    @property
    def d2(self):
        return self.rho * self.d1

    @property
    def k_hopf(self):
        return self.a + 2.0 * self.lam

    def replace(self, **kw):
        d = dict(self.__dict__)
        d.update(kw)
        return PredatorPreyParams(**d)


def solve_xi1(p: PredatorPreyParams, k=None, tol=1e-12, max_iter=100):
    """Predator-1 density of the coexistence equilibrium on the level ``c``.

    Solves ``xi + rho c xi**rho = gamma (a + lambda)(k - lambda) / (m1 k)``.
    The left side is increasing and convex, so Newton started at the right
    side value decreases monotonically to the root.
    """
    k = p.k if k is None else k
    rhs = p.gamma * (p.a + p.lam) * (k - p.lam) / (p.m1 * k)
    if not rhs > 0:
        raise NoCoexistenceError(f"no positive equilibrium for k={k} (need k > lambda={p.lam})")
    if p.c == 0:
        return rhs
    xi = rhs
    for _ in range(max_iter):
        g = xi + p.rho * p.c * xi ** p.rho - rhs
        if abs(g) < tol:
            return xi
        xi -= g / (1.0 + p.rho * p.rho * p.c * xi ** (p.rho - 1.0))
    raise NoCoexistenceError("Newton for xi1 did not converge")


def reduced_predator_prey(p: PredatorPreyParams) -> ParametricPlanarSystem:
    """Planar ``(S, x1)`` system on the level ``x2 = c x1**rho``; parameter ``k``."""
    g, a, m1, rho, c, b1, lam = p.gamma, p.a, p.m1, p.rho, p.c, p.beta1, p.lam

    def fn(x, k):
        S, x1 = x[0], x[1]
        sat = S / (a + S)
        return np.stack([
            g * S * (1.0 - S / k) - (x1 + rho * c * np.abs(x1) ** rho) * m1 * sat,
            b1 * x1 * (S - lam) / (a + S),
        ])

    def eq(k):
        return np.array([lam, solve_xi1(p, k)])

    return ParametricPlanarSystem(
        fn=fn, param_range=(lam * (1 + 1e-9), max(10 * p.k_hopf, p.k)), label="predator-prey-2d",
        param_name="k", equilibrium=eq, bounds=((1e-12, 1e-12), (np.inf, np.inf)),
        meta={"params": p},
    )


def full_3d_system(p: PredatorPreyParams) -> ParametricSystem:
    """The three-dimensional model in ``(S, x1, x2)``; parameter ``k``."""
    g, a, m1, m2, d1, d2 = p.gamma, p.a, p.m1, p.m2, p.d1, p.d2

    def fn(x, k):
        S, x1, x2 = x[0], x[1], x[2]
        sat = S / (a + S)
        return np.stack([
            g * S * (1.0 - S / k) - m1 * x1 * sat - m2 * x2 * sat,
            m1 * x1 * sat - d1 * x1,
            m2 * x2 * sat - d2 * x2,
        ])

    return ParametricSystem(
        fn=fn, dim=3, param_range=(p.lam * (1 + 1e-9), max(10 * p.k_hopf, p.k)), label="predator-prey-3d",
        param_name="k", bounds=((1e-12,) * 3, (np.inf,) * 3), meta={"params": p},
    )


def invariant_level(p: PredatorPreyParams, x):
    """The conserved quantity ``x2 / x1**rho`` (vectorized over columns)."""
    x = np.asarray(x, dtype=float)
    return x[2] / x[1] ** p.rho


def equilibrium_segment_point(p: PredatorPreyParams, x1, k=None):
    """Point of the equilibrium segment with prescribed ``x1``."""
    k = p.k if k is None else k
    total = p.gamma * (p.a + p.lam) * (k - p.lam) / (p.m1 * k)
    x2 = (total - x1) / p.rho
    if x2 < 0 or x1 < 0:
        raise InvalidParametersError("x1 outside the equilibrium segment")
    return np.array([p.lam, x1, x2])


def lift_to_3d(p: PredatorPreyParams, state2):
    """Embed an ``(S, x1)`` state into the level ``x2 = c x1**rho``."""
    S, x1 = np.asarray(state2, dtype=float)
    return np.array([S, x1, p.c * x1 ** p.rho])


def log_coordinates(system: ParametricSystem) -> ParametricSystem:
    """Same flow written for ``z = log x``; keeps every coordinate positive."""

    def fn(z, k):
        x = np.exp(z)
        return system.eval(x, k) / x

    return ParametricSystem(fn=fn, dim=system.dim, param_range=system.param_range,
                            label=f"log({system.label})", param_name=system.param_name)


def integrate_positive(system, x0, k, t_span, tol=(1e-10, 1e-8), floor=1e-12):
    """Integrate an ecological model, switching to log coordinates if needed.

    The plain integration is kept unless some coordinate drops below
    ``floor``, in which case the run is repeated in log coordinates.
    Returns ``(t, states)`` with ``states`` of shape ``(dim, len(t))``.
    """
    x0 = np.asarray(x0, dtype=float)
    if np.all(x0 >= floor):
        traj = integrate(system, x0, k, t_span, tol=tol)
        if np.all(traj.y >= floor):
            return traj.t, traj.y
    traj = integrate(log_coordinates(system), np.log(np.maximum(x0, floor)), k, t_span, tol=tol)
    return traj.t, np.exp(traj.y)


# ------------------------------------------------------------------ registry


def _is_number(x):
    return isinstance(x, (int, float, np.integer, np.floating)) and not isinstance(x, bool)


def _check_type(model, name, value, default):
    """Reject override values whose type does not match the documented default."""
    if isinstance(default, int) and not isinstance(default, bool):
        ok = isinstance(value, (int, np.integer)) and not isinstance(value, bool)
    elif isinstance(default, float):
        ok = _is_number(value) and np.isfinite(value)
    else:  # optional coefficient lists
        ok = value is None or (isinstance(value, (list, tuple, np.ndarray)) and all(_is_number(v) for v in value))
    if not ok:
        raise InvalidParametersError(f"{model}: parameter {name!r} has invalid value {value!r}")
    return value


@dataclass(frozen=True)
class ParamSpec:
    name: str
    default: object
    unit: str
    doc: str


@dataclass(frozen=True)
class ModelSpec:
    """Registry entry: builds the planar system analysed by the pipeline."""

    name: str
    description: str
    params: tuple
    build: Callable
    bracket: Callable
    default_offsets: tuple = (0.04,)
    extras: Dict[str, object] = field(default_factory=dict)

    def defaults(self):
        return {p.name: p.default for p in self.params}

    def resolve(self, overrides=None):
        values = self.defaults()
        unknown = set(overrides or {}) - set(values)
        if unknown:
            raise InvalidParametersError(f"unknown parameters for {self.name}: {sorted(unknown)}")
        for name, value in (overrides or {}).items():
            values[name] = _check_type(self.name, name, value, self.defaults()[name])
        return values

    def schema(self):
        return {
            "name": self.name,
            "description": self.description,
            "params": [{"name": p.name, "default": p.default, "unit": p.unit, "doc": p.doc} for p in self.params],
            "default_offsets": list(self.default_offsets),
        }


def _pp_params(values):
    return PredatorPreyParams(**{k: float(values[k]) for k in ("gamma", "k", "a", "m1", "d1", "rho", "c")})


def _build_quad_cubic(values):
    if values.get("quad") is not None or values.get("cubic") is not None:
        quad = np.asarray(values.get("quad") or np.zeros(6), dtype=float)
        cubic = np.asarray(values.get("cubic") or np.zeros(8), dtype=float)
        fam = SyntheticHopfFamily(quad.reshape(2, 3), cubic.reshape(2, 4), float(values["gamma0"]),
                                  label="quad-cubic-random")
    else:
        rng = np.random.default_rng(int(values["seed"]))
        fam = random_quad_cubic(rng, gamma_range=(0.5, 2.0), scale=float(values["scale"]))
    return fam.system()


_PP_PARAMS = (
    ParamSpec("gamma", 1.0, "1/time", "prey intrinsic growth rate"),
    ParamSpec("k", 3.0, "biomass", "prey carrying capacity (bifurcation parameter)"),
    ParamSpec("a", 1.0, "biomass", "semi-saturation constant of both predators"),
    ParamSpec("m1", 2.0, "1/time", "maximal birth rate of predator 1"),
    ParamSpec("d1", 1.0, "1/time", "death rate of predator 1"),
    ParamSpec("rho", 1.0, "dimensionless", "ratio m2/m1 = d2/d1"),
    ParamSpec("c", 1.0, "biomass^(1-rho)", "invariant level x2 = c x1^rho"),
)


def _pp_bracket(values):
    p = _pp_params(values)
    return (p.k_hopf - 0.5 * p.a, p.k_hopf + 0.5 * p.a)


REGISTRY: Dict[str, ModelSpec] = {
    "normal-form": ModelSpec(
        name="normal-form",
        description="canonical Hopf family x' = a x - g y + s x r^2, y' = g x + a y + s y r^2 (K = s)",
        params=(
            ParamSpec("sigma", -1.0, "dimensionless", "sign of the cubic term (+1 or -1)"),
            ParamSpec("gamma0", 1.0, "rad/time", "rotation frequency at the Hopf point"),
        ),
        build=lambda v: make_normal_form_family(v["sigma"], v["gamma0"]),
        bracket=lambda v: (-0.5, 0.5),
        default_offsets=(0.04,),
    ),
    "cubic-test": ModelSpec(
        name="cubic-test",
        description="x' = a x - g y - x^3, y' = g x + a y (K = -3/8)",
        params=(ParamSpec("gamma0", 1.0, "rad/time", "rotation frequency at the Hopf point"),),
        build=lambda v: cubic_test_family(v["gamma0"]).system(),
        bracket=lambda v: (-0.5, 0.5),
        default_offsets=(0.03,),
    ),
    "quad-cubic-random": ModelSpec(
        name="quad-cubic-random",
        description="canonical linear part plus seeded random quadratic and cubic terms",
        params=(
            ParamSpec("seed", 42, "dimensionless", "random seed for the coefficients"),
            ParamSpec("scale", 1.0, "dimensionless", "coefficients drawn from [-scale, scale]"),
            ParamSpec("gamma0", 1.0, "rad/time", "frequency used when quad/cubic are given explicitly"),
            ParamSpec("quad", None, "dimensionless", "optional explicit 6 quadratic coefficients"),
            ParamSpec("cubic", None, "dimensionless", "optional explicit 8 cubic coefficients"),
        ),
        build=_build_quad_cubic,
        bracket=lambda v: (-0.5, 0.5),
        default_offsets=(0.01,),
    ),
    "predator-prey-2d": ModelSpec(
        name="predator-prey-2d",
        description="two predators, one prey, reduced to the level x2 = c x1^rho; parameter k",
        params=_PP_PARAMS,
        build=lambda v: reduced_predator_prey(_pp_params(v)),
        bracket=_pp_bracket,
        default_offsets=(0.05,),
    ),
    "predator-prey-3d": ModelSpec(
        name="predator-prey-3d",
        description="full three-dimensional two-predator one-prey model; analysed slice by slice in c",
        params=_PP_PARAMS,
        build=lambda v: reduced_predator_prey(_pp_params(v)),
        bracket=_pp_bracket,
        default_offsets=(0.05,),
        extras={"three_d": lambda v: full_3d_system(_pp_params(v))},
    ),
}


def list_models():
    return [REGISTRY[name].schema() for name in REGISTRY]


def get_model(name) -> ModelSpec:
    try:
        return REGISTRY[name]
    except KeyError:
        raise InvalidParametersError(f"unknown model {name!r}; known: {sorted(REGISTRY)}") from None
