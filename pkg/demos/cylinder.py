"""Three-dimensional model in (S, x1, x2): orbits on invariant surfaces x2 = c x1**rho."""

import numpy as np

from hopfavg import average_K, cubic_normal_form, detect_orbit, integrate, locate_hopf, polar_coefficients, predict
from hopfavg.models import PredatorPreyParams, full_3d_system, invariant_level, lift_to_3d, reduced_predator_prey

base = PredatorPreyParams(gamma=1.0, k=3.0, a=1.0, m1=2.0, d1=1.0, rho=1.0, c=1.0)
k = 3.05
for c in (0.5, 1.0, 2.0):
    p = base.replace(c=c)
    s = reduced_predator_prey(p)
    hopf = locate_hopf(s, alpha_bracket=(2.5, 3.5))
    pred = predict(average_K(polar_coefficients(cubic_normal_form(s, hopf))), hopf)
    orbit = detect_orbit(s, hopf, k, pred)
    x0 = lift_to_3d(p, orbit.point_on_orbit)
    tr = integrate(full_3d_system(p), x0, k, (0.0, orbit.period), tol=(1e-12, 1e-10))
    levels = invariant_level(p, tr(orbit.times))
    print(f"c = {c}: period {orbit.period:.4f}, 3D closure {np.linalg.norm(tr.final - x0):.1e}, "
          f"invariant drift {np.max(np.abs(levels / c - 1)):.1e}")
