import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_RESULTS: list[tuple[str, object, str]] = []


@pytest.fixture
def record():
    def _record(criterion: str, passed, detail: str = "") -> None:
        """``passed=None`` marks an informational line that gates nothing."""
        ACCEPTANCE_RESULTS.append((criterion, passed if passed is None else bool(passed), detail))
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, passed, detail in ACCEPTANCE_RESULTS:
        status = "INFO" if passed is None else ("PASS" if passed else "FAIL")
        terminalreporter.write_line(f"{criterion}: {status}  {detail}")
