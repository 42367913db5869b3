import pytest

from frobkit.verify import RunConfig, run

_LINES: list[str] = []


@pytest.fixture
def record():
    """Record one acceptance line; printed in the terminal summary whatever the outcome."""

    def rec(label: str, ok: bool, detail: str) -> bool:
        _LINES.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        return ok

    return rec


@pytest.fixture(scope="session")
def default_reports():
    return run(RunConfig())


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in _LINES:
            terminalreporter.write_line(line)
