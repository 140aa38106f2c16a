"""Supercritical normal form: predicted versus shot orbit over a few alphas."""

import numpy as np

from hopfavg import average_K, build_annulus, cubic_normal_form, locate_hopf, polar_coefficients, predict, verify
from hopfavg.models import make_normal_form_family


def main():
    system = make_normal_form_family(-1.0, 1.0)
    hopf = locate_hopf(system)
    K = average_K(polar_coefficients(cubic_normal_form(system, hopf)))
    pred = predict(K, hopf)
    print(f"alpha0 = {hopf.alpha0:.3e}  gamma0 = {hopf.gamma0:.6f}  K = {K:.8f}  ({pred.verdict})")
    print(f"{'alpha':>8} {'predicted':>10} {'measured':>10} {'rel err':>9} {'multiplier':>11} {'exp(-4 pi a)':>12}")
    for alpha in (0.01, 0.04, 0.09):
        ann = build_annulus(pred, hopf, alpha)
        rep = verify(system, hopf, alpha, pred, ann, check_trapping=False)
        a_pred = pred.amplitude_fn(alpha)
        a_meas = rep.orbit.amplitude
        print(f"{alpha:8.3f} {a_pred:10.6f} {a_meas:10.6f} {abs(a_meas - a_pred) / a_pred:9.2e} "
              f"{rep.multipliers[1]:11.6f} {np.exp(-4 * np.pi * alpha):12.6f}")


if __name__ == "__main__":
    main()
