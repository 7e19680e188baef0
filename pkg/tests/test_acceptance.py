"""Acceptance criteria at their stated tolerances, one test per criterion.

Each test prints a ``[PASS]``/``[FAIL]`` line; the lines are also collected
into the pytest terminal summary.
"""

import pytest

from honeydisp import acceptance
from honeydisp.cli import resolve_workers

CHECKS = acceptance.registry(workers=resolve_workers(0))
SLOW = {"2", "4/K0", "4/K2", "4/K3", "5/theta=pi/6", "5/theta=0", "6", "8"}


@pytest.mark.parametrize(
    "key", [pytest.param(k, marks=pytest.mark.slow) if k in SLOW else k for k in CHECKS]
)
def test_criterion(key, acceptance_lines):
    res = CHECKS[key]()
    line = res.line()
    print(line)
    acceptance_lines.append(line)
    assert res.passed, line
