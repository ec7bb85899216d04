from __future__ import annotations

import pytest

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record one acceptance line; it is printed live and repeated in the terminal summary."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(tag: str, ok: bool, detail: str) -> bool:
        line = f"{tag:<5} {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
