import pytest

from commsense.profiles import load_profiles, scale_delays

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def scaled_profiles():
    return {p.name: scale_delays(p, 300e-9) for p in load_profiles()}


@pytest.fixture(scope="session")
def acceptance_log():
    def record(criterion: str, passed: bool, detail: str) -> None:
        line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
