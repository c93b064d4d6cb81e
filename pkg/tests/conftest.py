import random

import pytest

from cvpqubo import CvpInstance, SingularMatrixError

ACCEPTANCE_LINES: list[str] = []


def random_instances(seed, count, ns=(1, 2, 3), lo=-3, hi=3, target=20):
    """Random nonsingular instances with entries in [lo, hi] and targets in [-target, target]."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        n = rng.choice(ns)
        A = [[rng.randint(lo, hi) for _ in range(n)] for _ in range(n)]
        x = [rng.randint(-target, target) for _ in range(n)]
        try:
            out.append(CvpInstance.from_lists(A, x))
        except SingularMatrixError:
            continue
    return out


@pytest.fixture
def record():
    def _record(criterion, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
