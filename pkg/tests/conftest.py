import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from heavytail import SortedSample  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def tiny():
    return SortedSample([1.0, 2.0, 4.0, 8.0])


@pytest.fixture(scope="session")
def pareto_sample():
    from heavytail import pareto

    return SortedSample(pareto(1.0).sample(11, 2000))


# ---------------------------------------------------------------------------
# One pass/fail line per acceptance criterion in the terminal summary
# ---------------------------------------------------------------------------

_criteria: dict[str, list] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    entry = _criteria.setdefault(props["criterion"], [props.get("title", ""), True, []])
    entry[1] &= report.passed
    entry[2].extend(v for k, v in report.user_properties if k == "measured")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    key = lambda c: (int("".join(ch for ch in c if ch.isdigit())), c)  # noqa: E731
    for name in sorted(_criteria, key=key):
        title, ok, measured = _criteria[name]
        line = f"criterion {name:<3} {'PASS' if ok else 'FAIL'}  {title}"
        if measured:
            line += "  [" + "; ".join(measured) + "]"
        terminalreporter.write_line(line)
