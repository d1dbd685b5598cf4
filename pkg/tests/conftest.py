import os

import pytest

from nestedwalk.formats import load_machine
from nestedwalk.nested_words import StructuredAlphabet

FIXTURES = os.path.join(os.path.dirname(__file__), "..", "fixtures")


def fixture_path(name: str) -> str:
    return os.path.join(FIXTURES, name)


def load(name: str):
    return load_machine(fixture_path(name))


@pytest.fixture
def ax():
    return StructuredAlphabet(("a", "b"), ("x",))


@pytest.fixture
def s2():
    return StructuredAlphabet(("1", "2"), ("r",))


@pytest.fixture(name="load")
def load_fixture():
    return load


# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
