import numpy as np
import pytest

from hopfavg.errors import BranchMismatchError, DegenerateKError
from hopfavg.predict import (
    DEGENERATE,
    STABLE,
    UNSTABLE,
    auto_epsilon,
    averaged_radius,
    build_annulus,
    predict,
    winding_number,
)


def test_supercritical_prediction(nf_minus):
    pred = predict(-1.0, nf_minus.hopf)
    assert pred.verdict == STABLE and pred.branch_side == 1 and pred.time_direction == 1
    assert pred.rho0 == 1.0
    assert pred.amplitude_fn(0.04) == pytest.approx(0.2, abs=1e-15)
    assert pred.amplitude_fn(0.0) == 0.0


def test_subcritical_prediction(nf_plus):
    pred = predict(1.0, nf_plus.hopf)
    assert pred.verdict == UNSTABLE and pred.branch_side == -1 and pred.time_direction == -1
    assert pred.rho0 == 1.0
    with pytest.raises(BranchMismatchError):
        pred.amplitude_fn(0.04)
    assert pred.amplitude_fn(-0.04) == pytest.approx(0.2)


def test_cubic_amplitude_law(cubic_test):
    pred = predict(-3.0 / 8.0, cubic_test.hopf)
    assert pred.amplitude_fn(0.03) == pytest.approx(np.sqrt(8 * 0.03 / 3), rel=1e-14)
    assert pred.amplitude_fn(0.03) == pytest.approx(0.2828, abs=1e-4)


def test_degenerate_prediction(nf_minus):
    pred = predict(1e-8, nf_minus.hopf)
    assert pred.verdict == DEGENERATE and pred.degenerate
    with pytest.raises(DegenerateKError):
        pred.amplitude_fn(0.01)
    with pytest.raises(DegenerateKError):
        build_annulus(pred, nf_minus.hopf, 0.04)
    assert predict(1e-8, nf_minus.hopf, degeneracy_tol=1e-9).verdict == UNSTABLE


@pytest.mark.parametrize("K", [-2.0, -0.3, 0.7, 5.0])
def test_amplitude_scaling_is_exact(K, nf_minus):
    pred = predict(K, nf_minus.hopf)
    alphas = pred.branch_side * np.array([1e-4, 0.01, 0.09])
    r = np.array([pred.amplitude_fn(a) for a in alphas])
    np.testing.assert_allclose(r, np.sqrt(np.abs(alphas)) * pred.rho0, rtol=1e-15)
    assert np.all(np.diff(r) > 0)


def test_period_estimate(predator_prey):
    pred = predator_prey.pred
    assert pred.period_estimate(predator_prey.hopf.alpha0) == pytest.approx(2 * np.pi * np.sqrt(3), rel=1e-8)


def test_auto_epsilon():
    assert auto_epsilon(0.2) == pytest.approx(0.5 * np.sqrt(0.2))
    assert auto_epsilon(0.2) == pytest.approx(0.2236, abs=1e-4)
    assert auto_epsilon(1e-6) == 0.05
    assert auto_epsilon(4.0) == 0.5


def test_normal_form_annulus(nf_minus):
    ann = build_annulus(nf_minus.pred, nf_minus.hopf, 0.04, epsilon=0.25)
    assert (ann.inner_r, ann.outer_r) == pytest.approx((0.75, 1.25))
    assert ann.mu == pytest.approx(0.2)
    r_in = np.hypot(*ann.inner_curve)
    r_out = np.hypot(*ann.outer_curve)
    np.testing.assert_allclose(r_in, 0.15, atol=1e-12)
    np.testing.assert_allclose(r_out, 0.25, atol=1e-12)
    assert 0 < ann.inner_r < ann.rho0 < ann.outer_r


def test_auto_annulus(nf_minus):
    ann = build_annulus(nf_minus.pred, nf_minus.hopf, 0.04)
    assert ann.epsilon == pytest.approx(0.2236, abs=1e-4)


def test_annulus_argument_checks(nf_minus):
    with pytest.raises(BranchMismatchError):
        build_annulus(nf_minus.pred, nf_minus.hopf, -0.04)
    with pytest.raises(ValueError):
        build_annulus(nf_minus.pred, nf_minus.hopf, 0.04, epsilon=1.5)
    with pytest.raises(ValueError):
        build_annulus(nf_minus.pred, nf_minus.hopf, 0.04, epsilon="wide")


def test_predator_prey_annulus_is_elliptical_band(predator_prey):
    ann = build_annulus(predator_prey.pred, predator_prey.hopf, 3.05, epsilon=0.3)
    center = ann.center
    np.testing.assert_allclose(center[0], 1.0, atol=1e-12)
    for curve in (ann.inner_curve, ann.outer_curve):
        assert curve.shape == (2, 256)
        assert winding_number(curve, center) == 1
    # the outer boundary encloses the inner one along every ray from the center
    theta = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    d_in = np.linalg.norm(ann.to_original(np.full(64, ann.inner_r), theta) - center[:, None], axis=0)
    d_out = np.linalg.norm(ann.to_original(np.full(64, ann.outer_r), theta) - center[:, None], axis=0)
    assert np.all(d_out > d_in)
    # the band is not a circle in model coordinates
    assert np.ptp(d_out) / d_out.mean() > 0.1


def test_winding_number_of_double_loop():
    t = np.linspace(0, 4 * np.pi, 200, endpoint=False)
    assert winding_number(np.stack([np.cos(t), np.sin(t)]), [0, 0]) == 2
    assert winding_number(np.stack([np.cos(t), np.sin(t)]) + 3.0, [0, 0]) == 0


@pytest.mark.parametrize("fixture", ["nf_minus", "cubic_test", "predator_prey"])
def test_map_round_trip(fixture, request, rng):
    p = request.getfixturevalue(fixture)
    param = p.hopf.alpha0 + (0.05 if fixture == "predator_prey" else 0.03)
    ann = build_annulus(p.pred, p.hopf, param)
    rho = rng.uniform(ann.inner_r, ann.outer_r, size=50)
    theta = rng.uniform(-np.pi, np.pi, size=50)
    back_rho, back_theta = ann.from_original(ann.to_original(rho, theta))
    np.testing.assert_allclose(back_rho, rho, atol=1e-10)
    np.testing.assert_allclose(np.angle(np.exp(1j * (back_theta - theta))), 0.0, atol=1e-10)


@pytest.mark.parametrize("mu", [0.1, 0.2])
def test_boundary_signs_supercritical(mu, nf_minus, cubic_test):
    for p in (nf_minus, cubic_test):
        ann = build_annulus(p.pred, p.hopf, p.hopf.alpha0 + mu * mu)
        theta, inner, outer = ann.boundary_rates()
        assert theta.size == 256
        assert np.all(inner > 0) and np.all(outer < 0)
        assert ann.boundary_signs_ok()


def test_boundary_signs_subcritical(nf_plus):
    ann = build_annulus(nf_plus.pred, nf_plus.hopf, -0.04)
    _, inner, outer = ann.boundary_rates()
    assert np.all(inner < 0) and np.all(outer > 0)
    assert ann.boundary_signs_ok()


def test_averaged_radius_removes_ripple(cubic_test):
    # a circle of constant averaged radius is invariant to second order, so a
    # trajectory on the cycle has nearly constant averaged radius but a
    # visibly rippled plain radius
    frame = averaged_radius(cubic_test.hopf, 0.03, np.sqrt(0.03))
    assert frame.K_local == pytest.approx(-3 / 8, abs=1e-6)
    theta = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    assert np.max(np.abs(frame.U(theta))) > 0.05 or np.max(np.abs(frame.V(theta))) > 0.05
    plain = averaged_radius(cubic_test.hopf, 0.03, np.sqrt(0.03), order=0)
    np.testing.assert_allclose(plain.U(theta), 0.0)
    np.testing.assert_allclose(plain.V(theta), 0.0)
