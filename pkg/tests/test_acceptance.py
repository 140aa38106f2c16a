"""Acceptance suite: one test per criterion, each at its stated tolerance.

The terminal summary prints one ``criterion N: PASS/FAIL`` line per
criterion (see ``conftest.py``).  Wall-clock budgets include building the
Hopf data, so each test starts from the model constructors.
"""

import time

import numpy as np
import pytest

from hopfavg.averaging import average_K, average_system, averaged_periodic_predict, polar_coefficients, shoot_periodic
from hopfavg.integrate import integrate, monodromy
from hopfavg.models import (
    PredatorPreyParams,
    cubic_test_family,
    full_3d_system,
    integrate_positive,
    invariant_level,
    lift_to_3d,
    make_normal_form_family,
    random_quad_cubic_families,
    reduced_predator_prey,
)
from hopfavg.normalize import CubicNormalForm, cubic_normal_form, locate_hopf
from hopfavg.predict import build_annulus
from hopfavg.vectorfield import PeriodicSystem, derivatives_at
from hopfavg.verify import detect_orbit, trapping_check, verdict_matches, verify
from conftest import Pipeline
from oracles import displacement_fit, lyapunov_coefficient, predator_prey_frequency

PP = PredatorPreyParams(gamma=1.0, k=3.0, a=1.0, m1=2.0, d1=1.0, rho=1.0, c=1.0)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.1f} s, budget {self.seconds} s"


@pytest.mark.criterion(1, "supercritical normal form: K, amplitude law, multiplier")
def test_criterion_1_normal_form():
    with Budget(10):
        p = Pipeline(make_normal_form_family(-1.0, 1.0))
        k_mom, k_quad = average_K(p.pc, return_both=True)
        assert k_mom == pytest.approx(-1.0, abs=1e-8)
        assert abs(k_mom - k_quad) < 1e-10
        for alpha in (0.01, 0.04, 0.09):
            orbit = detect_orbit(p.system, p.hopf, alpha, p.pred)
            assert abs(orbit.amplitude - np.sqrt(alpha)) / np.sqrt(alpha) < 0.02
            mono = monodromy(p.system, orbit.point_on_orbit, alpha, orbit.period)
            assert abs(mono.multipliers[1] - np.exp(-4 * np.pi * alpha)) < 1e-3


@pytest.mark.criterion(2, "subcritical mirror: K = +1, reversed-time orbit, unstable")
def test_criterion_2_subcritical():
    with Budget(10):
        p = Pipeline(make_normal_form_family(1.0, 1.0))
        assert p.K == pytest.approx(1.0, abs=1e-8)
        assert p.pred.branch_side == -1
        ann = build_annulus(p.pred, p.hopf, -0.04)
        rep = verify(p.system, p.hopf, -0.04, p.pred, ann, check_trapping=False)
        assert rep.orbit is not None and rep.orbit.time_direction == -1
        assert rep.orbit.closure_residual < 1e-8
        assert rep.stability_observed == "unstable"


@pytest.mark.criterion(3, "K equals the classical first Lyapunov coefficient")
def test_criterion_3_lyapunov_oracle():
    with Budget(60):
        fams = random_quad_cubic_families(50, seed=42, gamma_range=(0.5, 2.0))
        for fam in fams:
            s = fam.system()
            h = locate_hopf(s)
            K = average_K(polar_coefficients(cubic_normal_form(s, h)))
            a = lyapunov_coefficient(fam.quad, fam.cubic, fam.gamma0)
            assert abs(K - a) <= 1e-6 * abs(a)
        # the oracle itself against return-map displacement fits
        for fam in fams[:3]:
            a = lyapunov_coefficient(fam.quad, fam.cubic, fam.gamma0)
            coarse = displacement_fit(fam.quad, fam.cubic, fam.gamma0, c=0.02)
            fine = displacement_fit(fam.quad, fam.cubic, fam.gamma0, c=0.01)
            assert abs(fine - a) < 1e-3 * abs(a)
            assert abs(fine - a) < abs(coarse - a)


@pytest.mark.criterion(4, "predator-prey case study at k = 3.05")
def test_criterion_4_predator_prey():
    with Budget(30):
        p = Pipeline(reduced_predator_prey(PP), bracket=(2.5, 3.5))
        assert p.hopf.alpha0 == pytest.approx(PP.a + 2 * PP.lam, abs=1e-6)
        assert p.hopf.gamma0 == pytest.approx(1 / np.sqrt(3), abs=1e-6)
        assert p.hopf.gamma0 == pytest.approx(
            predator_prey_frequency(PP.gamma, PP.a, PP.m1, PP.d1, PP.rho, PP.c, 3.0), abs=1e-6)
        ann = build_annulus(p.pred, p.hopf, 3.05, epsilon=0.3)
        rep = verify(p.system, p.hopf, 3.05, p.pred, ann, check_trapping=False)
        assert rep.orbit is not None
        assert rep.orbit.closure_residual < 1e-8
        assert rep.containment == 1.0
        assert verdict_matches(p.pred, rep)


@pytest.mark.criterion(5, "periodic averaging: stable zero and first-order distance")
def test_criterion_5_averaging():
    with Budget(5):
        ps = PeriodicSystem(fn=lambda t, x, a: -x + np.cos(t), period=2 * np.pi)
        y, verdict = averaged_periodic_predict(ps, average_system(ps), 0.1, [0.5])
        assert abs(y[0]) < 1e-10 and verdict == "stable"
        errs = []
        for alpha in (0.1, 0.05, 0.025):
            sol = shoot_periodic(ps, alpha, y)
            assert sol.residual < 1e-8
            errs.append(sol.sup_distance(y))
        for e1, e2 in zip(errs, errs[1:]):
            assert 1.6 <= e1 / e2 <= 2.4


def negative_K_random_families(n, seed=42):
    out = []
    for fam in random_quad_cubic_families(40, seed=seed):
        if lyapunov_coefficient(fam.quad, fam.cubic, fam.gamma0) < -0.1:
            out.append(fam)
        if len(out) == n:
            break
    return out


@pytest.mark.criterion(6, "annulus trapping and boundary signs for K < 0")
def test_criterion_6_trapping():
    with Budget(30):
        cases = [(Pipeline(make_normal_form_family(-1.0, 1.0)), (0.1, 0.2)),
                 (Pipeline(cubic_test_family().system()), (0.1, 0.2))]
        cases += [(Pipeline(f.system()), (0.1, 0.2)) for f in negative_K_random_families(2)]
        # the reduced predator-prey ring at mu = 0.2 reaches x1 <= 0 where the model is undefined
        cases.append((Pipeline(reduced_predator_prey(PP), bracket=(2.5, 3.5)), (0.1,)))
        n_cases = 0
        for p, mus in cases:
            assert p.K < 0
            for mu in mus:
                # parameter value with Re lambda = mu^2
                target = mu * mu
                lo, hi = p.hopf.alpha0, p.hopf.alpha0 + 4 * target / p.hopf.beta_prime
                for _ in range(60):
                    mid = 0.5 * (lo + hi)
                    lo, hi = (mid, hi) if p.hopf.beta(mid) < target else (lo, mid)
                param = 0.5 * (lo + hi)
                ann = build_annulus(p.pred, p.hopf, param)
                assert ann.mu == pytest.approx(mu, rel=1e-6)
                _, inner, outer = ann.boundary_rates(256)
                assert inner.size == outer.size == 256
                assert np.all(inner > 0) and np.all(outer < 0)
                ok, _, _ = trapping_check(p.system, ann, n_per_circle=16, periods=20, inflate=1.2)
                assert ok, f"{p.system.label} at mu={mu}"
                n_cases += 1
        assert n_cases == 9


@pytest.mark.criterion(7, "three-dimensional model: invariant levels and slice orbits")
def test_criterion_7_cylinder():
    with Budget(60):
        k = 3.05
        sys3 = full_3d_system(PP.replace(k=k))
        rng = np.random.default_rng(42)
        for x0 in rng.uniform(0.2, 2.0, size=(5, 3)):
            _, y = integrate_positive(sys3, x0, k, (0.0, 100.0), tol=(1e-12, 1e-11))
            c = invariant_level(PP, y)
            assert np.max(np.abs(c / c[0] - 1)) < 1e-6
        for c in (0.5, 1.0, 2.0):
            pc = PP.replace(c=c)
            p = Pipeline(reduced_predator_prey(pc), bracket=(2.5, 3.5))
            orbit = detect_orbit(p.system, p.hopf, k, p.pred)
            x0 = lift_to_3d(pc, orbit.point_on_orbit)
            tr = integrate(full_3d_system(pc), x0, k, (0.0, orbit.period), tol=(1e-12, 1e-10))
            assert np.linalg.norm(tr.final - x0) < 1e-7
            t = orbit.times[::16]
            np.testing.assert_allclose(tr(t)[:2], orbit.samples[:, ::16], atol=1e-7)


@pytest.mark.criterion(8, "frame invariance, Schwarz symmetry, Liouville identity, shooting idempotence")
def test_criterion_8_rotation_invariance():
    rng = np.random.default_rng(8)
    nf = CubicNormalForm.from_coefficients(rng.uniform(-1, 1, 6), rng.uniform(-1, 1, 8), 1.2)
    K = average_K(polar_coefficients(nf))
    for phi in rng.uniform(0, 2 * np.pi, size=8):
        assert abs(average_K(polar_coefficients(nf.rotated(phi))) - K) < 1e-9
    base = make_normal_form_family(-1.0, 1.0)
    h = locate_hopf(base)
    assert average_K(polar_coefficients(cubic_normal_form(base, h).rotated(rng.uniform(0, 6)))) == \
        pytest.approx(-1.0, abs=1e-9)


@pytest.mark.criterion(8, "frame invariance, Schwarz symmetry, Liouville identity, shooting idempotence")
def test_criterion_8_schwarz_symmetry():
    rng = np.random.default_rng(9)
    for fam in random_quad_cubic_families(5, seed=9):
        s = fam.system()
        for order in (2, 3):
            assert derivatives_at(s, rng.uniform(-0.5, 0.5, 2), 0.1, order).symmetry_defect() < 1e-6
    s = reduced_predator_prey(PP)
    for order in (2, 3):
        assert derivatives_at(s, s.equilibrium(3.0), 3.0, order).symmetry_defect() < 1e-6


@pytest.mark.criterion(8, "frame invariance, Schwarz symmetry, Liouville identity, shooting idempotence")
def test_criterion_8_liouville_identity():
    for p, param in ((Pipeline(cubic_test_family().system()), 0.03),
                     (Pipeline(reduced_predator_prey(PP), bracket=(2.5, 3.5)), 3.05)):
        orbit = detect_orbit(p.system, p.hopf, param, p.pred)
        mono = monodromy(p.system, orbit.point_on_orbit, param, orbit.period)
        assert mono.liouville_defect < 1e-6
        assert mono.trivial_defect < 5e-3


@pytest.mark.criterion(8, "frame invariance, Schwarz symmetry, Liouville identity, shooting idempotence")
def test_criterion_8_shooting_idempotence():
    for p, param in ((Pipeline(cubic_test_family().system()), 0.03),
                     (Pipeline(reduced_predator_prey(PP), bracket=(2.5, 3.5)), 3.05)):
        first = detect_orbit(p.system, p.hopf, param, p.pred)
        again = detect_orbit(p.system, p.hopf, param, p.pred, seed_radius=first.section_radius)
        assert abs(again.amplitude - first.amplitude) < 1e-10
