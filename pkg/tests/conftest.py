import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hopfavg.averaging import average_K, polar_coefficients  # noqa: E402
from hopfavg.models import (  # noqa: E402
    PredatorPreyParams,
    cubic_test_family,
    make_normal_form_family,
    reduced_predator_prey,
)
from hopfavg.normalize import cubic_normal_form, locate_hopf  # noqa: E402
from hopfavg.predict import predict  # noqa: E402

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "tests": 0, "seconds": 0.0})
    if rep.when == "call":
        entry["tests"] += 1
        entry["seconds"] += rep.duration
    if rep.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        e = _CRITERIA[number]
        status = "PASS" if e["ok"] else "FAIL"
        terminalreporter.write_line(
            f"criterion {number}: {status}  {e['title']}  ({e['tests']} checks, {e['seconds']:.1f} s)")


class Pipeline:
    """Hopf data, ``K`` and prediction for one system."""

    def __init__(self, system, bracket=None):
        self.system = system
        self.hopf = locate_hopf(system, alpha_bracket=bracket)
        self.nf = cubic_normal_form(system, self.hopf)
        self.pc = polar_coefficients(self.nf)
        self.K = average_K(self.pc)
        self.pred = predict(self.K, self.hopf)


@pytest.fixture(scope="session")
def nf_minus():
    return Pipeline(make_normal_form_family(-1.0, 1.0))


@pytest.fixture(scope="session")
def nf_plus():
    return Pipeline(make_normal_form_family(1.0, 1.0))


@pytest.fixture(scope="session")
def cubic_test():
    return Pipeline(cubic_test_family().system())


@pytest.fixture(scope="session")
def pp_params():
    return PredatorPreyParams(gamma=1.0, k=3.0, a=1.0, m1=2.0, d1=1.0, rho=1.0, c=1.0)


@pytest.fixture(scope="session")
def predator_prey(pp_params):
    return Pipeline(reduced_predator_prey(pp_params), bracket=(2.5, 3.5))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
