import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from hodgeft.frobenius import HodgeAlgebra  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "..", "src", "hodgeft", "data")


def data_path(name):
    return os.path.normpath(os.path.join(DATA, name + ".json"))


def load(name):
    return HodgeAlgebra.load(data_path(name))


@pytest.fixture(scope="session")
def fixture8():
    return load("fixture8")


@pytest.fixture(scope="session")
def exterior2():
    return load("exterior2")


@pytest.fixture(scope="session")
def trivial():
    return load("trivial")


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
