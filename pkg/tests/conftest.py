import pytest

import random_collect as rc

# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def record(criterion: int, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES[criterion] = f"criterion {criterion:2d}: {'PASS' if passed else 'FAIL'}  {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[c])


@pytest.fixture
def family():
    """Build a named family with all non-sink nodes as sources."""
    def make(kind, size, **kw):
        if kind == "hypercube":
            return rc.build_topology({"kind": "hypercube", "x": size, **kw})
        return rc.build_topology({"kind": kind, "n": size, **kw})
    return make
