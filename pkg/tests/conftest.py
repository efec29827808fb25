import pytest

_CRITERIA_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_CRITERIA_KEY] = {}


@pytest.fixture
def criterion(request):
    """Record sub-check outcomes for one acceptance criterion: ``criterion(name, ok, detail)``."""
    table = request.config.stash[_CRITERIA_KEY]

    def record(label: str, checks: list[tuple[str, bool, str]]):
        table[label] = checks
        return all(ok for _, ok, _ in checks)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(_CRITERIA_KEY, {})
    if not table:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for label in sorted(table):
        checks = table[label]
        ok = all(c[1] for c in checks)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  {label}")
        for name, passed, detail in checks:
            tr.write_line(f"      [{'ok' if passed else 'FAIL'}] {name}: {detail}")
