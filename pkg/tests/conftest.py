import time

import pytest

from leeyang import landscape
from leeyang.potential import ising1, ising2

WINDOW = (-2.0, 4.0, -3.0, 3.0)

# criterion number -> (title, passed, seconds, detail); filled by test_acceptance
ACCEPTANCE: dict[int, list] = {}


@pytest.fixture(scope="session")
def v1():
    return ising1()


@pytest.fixture(scope="session")
def v2():
    return ising2()


@pytest.fixture(scope="session")
def field_v1(v1):
    return landscape.build_branch_field(v1, WINDOW, 400)


@pytest.fixture(scope="session")
def curves_v1(field_v1):
    return landscape.extract_curves(field_v1)


@pytest.fixture(scope="session")
def field_v2(v2):
    return landscape.build_branch_field(v2, (-1.0, 1.0, -2.0, 2.0), 200)


class CriterionRecorder:
    """Context manager that records PASS/FAIL and wall time for one criterion."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title

    def __enter__(self):
        self.t0 = time.perf_counter()
        entry = ACCEPTANCE.setdefault(self.number, [self.title, True, 0.0, []])
        self.entry = entry
        return self

    def note(self, text: str) -> None:
        self.entry[3].append(text)

    def __exit__(self, exc_type, exc, tb):
        self.entry[2] += time.perf_counter() - self.t0
        if exc_type is not None:
            self.entry[1] = False
            self.entry[3].append(f"{exc_type.__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
        return False


@pytest.fixture
def criterion():
    return CriterionRecorder


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        title, passed, secs, notes = ACCEPTANCE[num]
        line = f"{'PASS' if passed else 'FAIL'}  criterion {num}: {title} ({secs:.1f} s)"
        terminalreporter.write_line(line)
        for note in notes:
            terminalreporter.write_line(f"      {note}")
