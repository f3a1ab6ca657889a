import pytest

from intervention.cournot import CournotParams, make_game

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def record():
    """Log one acceptance line; the terminal summary prints them all."""

    def _record(label: str, passed: bool, detail: str = "") -> bool:
        _ACCEPTANCE.append((label, bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'} {label} {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")


def cournot_game(a0_max, step=1.0, q=12.0, b=1.0, caps=(12.0, 12.0)):
    return make_game(CournotParams(q=q, b=b, a0_max=a0_max, a_max=caps, grid_step=step))


@pytest.fixture
def powerless():
    return cournot_game(0.0)


@pytest.fixture
def omnipotent():
    return cournot_game(12.0)
