import pytest
from hypothesis import HealthCheck, settings

from bgpmatch.engine import Dataset
from helpers import DATA

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def artists() -> Dataset:
    return Dataset.from_file(str(DATA / "artists.nt"))


@pytest.fixture(scope="session")
def artists_query_text() -> str:
    return (DATA / "artists.rq").read_text()


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance(request):
    """Record one verdict line per acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(key: str, ok: bool | None, detail: str) -> None:
        verdict = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        line = f"[{verdict}] criterion {key}: {detail}"
        lines[key] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
