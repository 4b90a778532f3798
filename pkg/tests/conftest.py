import numpy as np
import pytest

from hebbswarm.plastic_net import Architecture


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def arch():
    return Architecture()


ACCEPTANCE = []


@pytest.fixture
def verdict(request):
    """Record one acceptance line; the test still fails through its own asserts."""
    def record(number, title, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE.append((number, line))
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
