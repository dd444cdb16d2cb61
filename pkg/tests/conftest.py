import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from faultline import compile_sim
from faultline import fixtures as fx

_acceptance_results: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        _acceptance_results.append((name, "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"{outcome}  {name}")


@pytest.fixture(scope="session")
def add16():
    return fx.add16()


@pytest.fixture(scope="session")
def add16_model(add16):
    return compile_sim(add16)


@pytest.fixture(scope="session")
def alu():
    return fx.alu()


@pytest.fixture(scope="session")
def alu_buggy():
    return fx.alu(swap_add_sub=True)
