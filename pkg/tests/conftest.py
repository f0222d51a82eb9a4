import numpy as np
import pytest

_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(8675309)


@pytest.fixture
def report():
    """Record one acceptance line; the lines are repeated in the terminal summary."""

    def _report(number: int, passed: bool, detail: str, status: str | None = None) -> None:
        line = f"criterion {number:>2}: {status or ('PASS' if passed else 'FAIL')}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
