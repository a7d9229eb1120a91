import pytest
from hypothesis import settings

from hardball import BoxDomain

# reproducible property runs; HYPOTHESIS_PROFILE=explore draws fresh examples
settings.register_profile("ci", derandomize=True, deadline=None)
settings.register_profile("explore", deadline=None)
settings.load_profile(__import__("os").environ.get("HYPOTHESIS_PROFILE", "ci"))

ACCEPTANCE = {}


@pytest.fixture
def unit():
    return BoxDomain((1.0, 1.0))


@pytest.fixture
def box12():
    return BoxDomain((1.0, 2.0))


@pytest.fixture
def box112():
    return BoxDomain((1.0, 1.0, 2.0))


@pytest.fixture
def record():
    """Record an acceptance outcome: ``record(key, label, ok, detail)``."""
    def _record(key, label, ok, detail=""):
        ACCEPTANCE[key] = (label, bool(ok), detail)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        label, ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{key} {'PASS' if ok else 'FAIL'}  {label}  {detail}".rstrip())
