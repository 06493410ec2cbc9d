import numpy as np
import pytest

from indmech import (
    build_adherence,
    build_birthweight,
    build_pie,
    build_surgery,
    build_violation,
    build_with_l,
    random_fig4_model,
    random_fig7_model,
)

SUITE_SIZE = 200


@pytest.fixture(scope="session")
def toy1():
    return build_surgery()


@pytest.fixture(scope="session")
def toy1v():
    return build_violation()


@pytest.fixture(scope="session")
def pie():
    return build_pie()


@pytest.fixture(scope="session")
def with_l():
    return build_with_l()


@pytest.fixture(scope="session")
def birthweight():
    return build_birthweight()


@pytest.fixture(scope="session")
def adherence():
    return build_adherence()


@pytest.fixture(scope="session")
def fig4_suite():
    rng = np.random.default_rng(20260816)
    return [random_fig4_model(rng) for _ in range(SUITE_SIZE)]


@pytest.fixture(scope="session")
def fig4_monotone_suite():
    rng = np.random.default_rng(20260817)
    return [random_fig4_model(rng, monotone=True) for _ in range(SUITE_SIZE)]


@pytest.fixture(scope="session")
def fig7_suite():
    rng = np.random.default_rng(20260818)
    return [random_fig7_model(rng) for _ in range(SUITE_SIZE)]


def pytest_terminal_summary(terminalreporter):
    """One line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance" not in nodeid or "::" not in nodeid:
                continue
            name = nodeid.split("::")[-1]
            lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{verdict}  {name}")
