"""Reduced predator-prey model just past its Hopf point at k = 3."""

from hopfavg import average_K, build_annulus, cubic_normal_form, locate_hopf, polar_coefficients, predict, verify
from hopfavg.models import PredatorPreyParams, reduced_predator_prey

params = PredatorPreyParams(gamma=1.0, k=3.0, a=1.0, m1=2.0, d1=1.0, rho=1.0, c=1.0)
system = reduced_predator_prey(params)
hopf = locate_hopf(system, alpha_bracket=(2.5, 3.5))
K = average_K(polar_coefficients(cubic_normal_form(system, hopf)))
pred = predict(K, hopf)
print(f"Hopf point k* = {hopf.alpha0:.8f}, frequency {hopf.gamma0:.8f}, K = {K:.6f} ({pred.verdict})")

for k in (3.02, 3.05, 3.1):
    ann = build_annulus(pred, hopf, k, epsilon=0.3)
    rep = verify(system, hopf, k, pred, ann)
    o = rep.orbit
    print(f"k = {k:.2f}: period {o.period:.4f}, closure {o.closure_residual:.1e}, "
          f"containment {rep.containment:.2f}, trapping {rep.trapping}, "
          f"multiplier {rep.multipliers[1]:.4f} -> {rep.stability_observed}")
