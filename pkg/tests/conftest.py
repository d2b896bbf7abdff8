import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=25, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """record(k, ok, detail) stores one acceptance line; the summary prints them all."""

    def record(k: int, ok: bool, detail: str) -> bool:
        CRITERIA[k] = (ok, detail)
        print(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        ok, detail = CRITERIA[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
