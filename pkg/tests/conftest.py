import numpy as np
import pytest

from cramerwold import c_const
from cramerwold.oracles import constant_identity_radial


@pytest.fixture(scope="session", autouse=True)
def inversion_constant_guard():
    # Sign or convention drift in c_m would silently corrupt every reconstruction.
    for m in (1, 2):
        lhs, rhs = constant_identity_radial(m)
        assert rhs == c_const(m)
        assert abs(lhs / rhs - 1.0) < 1e-9, f"c_{m} fails the bump identity: {lhs} vs {rhs}"


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    # Acceptance verdicts are collected by test_acceptance.py as it runs.
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
