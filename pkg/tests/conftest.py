import pytest

_LINES = pytest.StashKey[list]()


@pytest.fixture
def record(request):
    """Append a one-line verdict that is echoed in the terminal summary."""
    lines = request.config.stash.setdefault(_LINES, [])

    def _record(label, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
