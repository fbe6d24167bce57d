import contextlib

import pytest

from rkfiltration.eos import GasModel
from rkfiltration.isentrope import build
from rkfiltration.phase import trace_curve

_REPORT = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def gas():
    return GasModel()


@pytest.fixture(scope="session")
def curve(gas):
    return trace_curve(gas, T_min=0.15, steps=200)


@pytest.fixture(scope="session")
def iso0():
    return build(0.0)


@pytest.fixture(scope="session")
def iso1():
    return build(1.0)


@pytest.fixture
def criterion(request):
    """Context manager recording one PASS/FAIL line for an acceptance check.

    Usage: ``with criterion(3, "coexistence") as note: ...; note("detail")``.
    The line is printed in the terminal summary whatever the capture mode.
    """
    lines = request.config.stash.setdefault(_REPORT, [])

    @contextlib.contextmanager
    def record(number, title):
        details = []
        try:
            yield details.append
        except BaseException as exc:
            details.append(f"{type(exc).__name__}: {str(exc).splitlines()[0] if str(exc) else ''}")
            lines.append((number, "FAIL", title, details))
            print(f"criterion {number}: FAIL {title}")
            raise
        lines.append((number, "PASS", title, details))
        print(f"criterion {number}: PASS {title}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_REPORT, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, title, details in sorted(lines, key=lambda x: x[0]):
        extra = f" ({'; '.join(details)})" if details else ""
        terminalreporter.write_line(f"[{status}] {number:>2}. {title}{extra}")
