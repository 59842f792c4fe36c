import math

import numpy as np
import pytest

from omdrift.cli import case_beta
from omdrift.simulate import BoundaryConditions, shoot

BC = BoundaryConditions(0.0, math.sqrt(2.0))


@pytest.fixture(scope="session")
def case_paths():
    """Most probable paths of the three named examples on [0, 1], dt = 1e-3."""
    out = {}
    for name in ("I", "II", "III"):
        beta, eps = case_beta(name)
        out[name] = shoot(beta, eps, BC, T=1.0, dt=1e-3)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1]
        number = int(name.split("_")[2])
        _CRITERIA[number] = (name, report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        name, outcome = _CRITERIA[number]
        tag = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{tag}  criterion {number}: {name}")
