import numpy as np
import pytest
from scipy.optimize import linear_sum_assignment

from fphomotopy.problems import random_mep
from fphomotopy.solver import solve

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE_LINES: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        ok, detail = ACCEPTANCE_LINES[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def match_sets(a, b):
    """Optimal one-to-one matching; distances relative to ``max(||b||, 1)``."""
    a = np.asarray(a).reshape(len(a), -1)
    b = np.asarray(b).reshape(len(b), -1)
    cost = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    cost /= np.maximum(np.linalg.norm(b, axis=1)[None, :], 1.0)
    ri, ci = linear_sum_assignment(cost)
    return cost[ri, ci]


@pytest.fixture(scope="session")
def small_report():
    """Random k=2, n=3 instance solved once for the unit tests."""
    inst = random_mep(2, 3, 11)
    return inst, solve(inst, seed=5)
