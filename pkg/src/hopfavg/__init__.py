"""Hopf bifurcation analysis by integral averaging.

Given a parametric planar vector field, the package locates the Hopf point,
computes the averaged cubic coefficient ``K``, predicts the amplitude and
stability of the bifurcating orbit together with a trapping annulus, and
checks every prediction by direct numerical integration.
"""

__version__ = "0.1.0"

from .errors import HopfAvgError  # noqa: E402
from .vectorfield import (  # noqa: E402
    DerivativeTensor,
    ParametricPlanarSystem,
    ParametricSystem,
    PeriodicSystem,
    d_alpha_eigen_real,
    derivatives_at,
    jacobian,
)
from .integrate import Trajectory, find_crossings, integrate, monodromy  # noqa: E402
from .normalize import CubicNormalForm, HopfData, cubic_normal_form, find_equilibrium, locate_hopf  # noqa: E402
from .averaging import (  # noqa: E402
    TrigPoly,
    average_K,
    average_system,
    averaged_periodic_predict,
    averaging_b_function,
    polar_coefficients,
    u1_hopf,
)
from .predict import Annulus, AveragedRadius, OrbitPrediction, build_annulus, predict  # noqa: E402
from .verify import DetectedOrbit, VerificationReport, detect_orbit, verify  # noqa: E402
from .models import (  # noqa: E402
    PredatorPreyParams,
    full_3d_system,
    get_model,
    list_models,
    make_normal_form_family,
    reduced_predator_prey,
    solve_xi1,
)

__all__ = [
    "__version__",
    "HopfAvgError",
    "DerivativeTensor", "ParametricPlanarSystem", "ParametricSystem", "PeriodicSystem",
    "d_alpha_eigen_real", "derivatives_at", "jacobian",
    "Trajectory", "find_crossings", "integrate", "monodromy",
    "CubicNormalForm", "HopfData", "cubic_normal_form", "find_equilibrium", "locate_hopf",
    "TrigPoly", "average_K", "average_system", "averaged_periodic_predict", "averaging_b_function",
    "polar_coefficients", "u1_hopf",
    "Annulus", "AveragedRadius", "OrbitPrediction", "build_annulus", "predict",
    "DetectedOrbit", "VerificationReport", "detect_orbit", "verify",
    "PredatorPreyParams", "full_3d_system", "get_model", "list_models", "make_normal_form_family",
    "reduced_predator_prey", "solve_xi1",
]
