import pytest

_ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion.

    Lines are printed immediately (visible with ``-s``) and repeated in the
    terminal summary.
    """
    lines = request.config.stash[_ACCEPTANCE_KEY]

    def record(number: int, title: str, passed: bool, detail: str = "") -> bool:
        line = f"ACCEPTANCE {number} {'PASS' if passed else 'FAIL'} {title}"
        if detail:
            line += f" | {detail}"
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
