"""Randomized invariants checked with hypothesis."""

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from hopfavg.averaging import PolarCoefficients, TrigPoly, average_K, averaging_b_function, polar_coefficients
from hopfavg.integrate import monodromy
from hopfavg.models import SyntheticHopfFamily
from hopfavg.normalize import CubicNormalForm, jordan_transform
from hopfavg.predict import predict
from hopfavg.vectorfield import ParametricPlanarSystem, derivatives_at
from oracles import lyapunov_coefficient

coef = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
angle = st.floats(min_value=0.0, max_value=2 * np.pi, allow_nan=False)
freq = st.floats(min_value=0.5, max_value=2.0, allow_nan=False)
PROFILE = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def nf_strategy():
    return st.builds(
        lambda q, c, g: CubicNormalForm.from_coefficients(q, c, g),
        st.lists(coef, min_size=6, max_size=6), st.lists(coef, min_size=8, max_size=8), freq,
    )


@PROFILE
@given(st.lists(coef, min_size=1, max_size=7), angle)
def test_trigpoly_periodic(coeffs, theta):
    p = TrigPoly(coeffs)
    assert p(theta + 2 * np.pi) == pytest.approx(p(theta), abs=1e-12)
    assert p.mean() == pytest.approx(p.mean_simpson(), abs=1e-10)


@PROFILE
@given(nf_strategy(), angle)
def test_K_rotation_invariant(nf, phi):
    K = average_K(polar_coefficients(nf))
    assert average_K(polar_coefficients(nf.rotated(phi))) == pytest.approx(K, abs=1e-9)


@PROFILE
@given(nf_strategy())
def test_K_equals_lyapunov_coefficient(nf):
    K = average_K(polar_coefficients(nf))
    a = lyapunov_coefficient(nf.quad, nf.cubic, nf.gamma0)
    assert K == pytest.approx(a, rel=1e-9, abs=1e-12)


@PROFILE
@given(st.lists(coef, min_size=3, max_size=6), st.floats(min_value=0.2, max_value=5.0))
def test_b_function_identity(coeffs, w):
    A = TrigPoly(coeffs)
    b, A_bar = averaging_b_function(A, w)
    theta = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    h = 1e-5
    db = (b(theta + h) - b(theta - h)) / (2 * h)
    np.testing.assert_allclose(A(theta) + w * db, A_bar, atol=1e-8)
    np.testing.assert_allclose(b(theta + 2 * np.pi), b(theta), atol=1e-10)


@PROFILE
@given(st.lists(coef, min_size=6, max_size=6), st.lists(coef, min_size=8, max_size=8),
       st.lists(st.floats(-0.5, 0.5), min_size=2, max_size=2))
def test_mixed_partials_are_symmetric(q, c, point):
    fam = SyntheticHopfFamily(np.reshape(q, (2, 3)), np.reshape(c, (2, 4)), 1.0)
    system = fam.system()
    for order in (2, 3):
        tensor = derivatives_at(system, point, 0.1, order)
        assert tensor.symmetry_defect() < 1e-6


@settings(max_examples=15, deadline=None)
@given(st.lists(coef, min_size=6, max_size=6), st.lists(coef, min_size=8, max_size=8),
       st.floats(0.05, 0.3), angle)
def test_liouville_identity(q, c, r, theta):
    fam = SyntheticHopfFamily(np.reshape(q, (2, 3)), np.reshape(c, (2, 4)), 1.0)
    system = fam.system()
    x0 = r * np.array([np.cos(theta), np.sin(theta)])
    mono = monodromy(system, x0, 0.05, 2.0)
    assert mono.liouville_defect < 1e-6


@PROFILE
@given(st.floats(0.1, 3.0), st.floats(-0.5, 0.5), st.lists(st.floats(-2, 2), min_size=4, max_size=4),
       st.booleans())
def test_jordan_transform_canonical(g, beta, m, flip):
    M = np.reshape(m, (2, 2))
    if abs(np.linalg.det(M)) < 0.1:
        M = M + 2 * np.eye(2)
    if abs(np.linalg.det(M)) < 0.1:
        return
    s = -1 if flip else 1
    J = M @ np.array([[beta, -s * g], [s * g, beta]]) @ np.linalg.inv(M)
    T, Tinv = jordan_transform(J)
    np.testing.assert_allclose(T @ Tinv, np.eye(2), atol=1e-12)
    scale = max(1.0, np.abs(J).max())
    np.testing.assert_allclose(Tinv @ J @ T, [[beta, -g], [g, beta]], atol=1e-9 * scale * np.linalg.cond(M))


@PROFILE
@given(st.floats(-5, 5).filter(lambda k: abs(k) > 1e-3), st.floats(1e-4, 0.2))
def test_amplitude_scaling(K, mag):
    pred = predict(K, None)
    alpha = pred.branch_side * mag
    assert pred.amplitude_fn(alpha) == pytest.approx(np.sqrt(mag) * abs(K) ** -0.5, rel=1e-14)
    assert pred.amplitude_fn(alpha / 4) == pytest.approx(pred.amplitude_fn(alpha) / 2, rel=1e-14)


@PROFILE
@given(st.lists(coef, min_size=4, max_size=4), st.lists(coef, min_size=4, max_size=4),
       st.lists(coef, min_size=5, max_size=5), st.floats(-3, 3))
def test_K_bilinear(c3, d3, c4, s):
    C3, D3, C4 = TrigPoly(c3), TrigPoly(d3), TrigPoly(c4)
    g = 1.3
    base = average_K(PolarCoefficients(C3, C4, D3, g))
    cross = base - C4.mean()
    assert average_K(PolarCoefficients(s * C3, C4, D3, g)) == pytest.approx(C4.mean() + s * cross, abs=1e-12)
    assert average_K(PolarCoefficients(C3, s * C4, D3, g)) == pytest.approx(s * C4.mean() + cross, abs=1e-12)


def test_planar_system_rejects_wrong_shape():
    with pytest.raises(ValueError):
        ParametricPlanarSystem(fn=lambda x, a: x, dim=3)
