import re

import numpy as np
import pytest

from attrep import DomainSpec, ModelParams


@pytest.fixture
def unit_square_16():
    return DomainSpec((1.0, 1.0), (16, 16))


@pytest.fixture
def unit_square_32():
    return DomainSpec((1.0, 1.0), (32, 32))


@pytest.fixture
def unit_params():
    return ModelParams(alpha=1.0, beta=1.0, gamma=1.0, delta=1.0, chi=1.0, xi=1.0, rho=0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance" not in nodeid:
                continue
            match = _CRITERION.search(nodeid)
            if not match:
                continue
            number = int(match.group(1))
            verdict = "PASS" if outcome == "passed" else "FAIL"
            lines[number] = f"ACCEPTANCE {number} ({match.group(2)}): {verdict}"
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
