import numpy as np
import pytest

from tetralab.hardy import build_ladder_basis
from tetralab.measure import MeasureContext, sample_boundary_arrays

MC_COUNT = 10**6
MC_SEED = 20240611


@pytest.fixture(scope="session")
def ctx():
    # exact for window degree 10 with symbols of pullback degree <= 6
    return MeasureContext(26)


@pytest.fixture(scope="session")
def basis(ctx):
    return build_ladder_basis(10, ctx)


@pytest.fixture(scope="session")
def mc_points():
    """10^6 samples of the boundary measure, shared by the Monte-Carlo checks."""
    return sample_boundary_arrays(MC_COUNT, MC_SEED)


def mc_mean(values):
    values = np.asarray(values)
    mean = values.mean()
    se = np.sqrt(np.mean(np.abs(values - mean) ** 2) / values.size)
    return mean, se


_acceptance_lines = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance_lines.append(f"{'PASS' if report.passed else 'FAIL'}  {name}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
