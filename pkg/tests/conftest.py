import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_RESULTS = {}


@pytest.fixture
def report(request):
    """Record a sub-check of an acceptance criterion: ``report(k, name, ok, detail)``."""

    def record(criterion, name, ok, detail=""):
        _RESULTS.setdefault(criterion, []).append((name, bool(ok), detail))
        print(f"[{criterion}] {name}: {'ok' if ok else 'not met'} {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_RESULTS):
        checks = _RESULTS[k]
        status = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        parts = "; ".join(f"{name} {'ok' if ok else 'NOT MET'} ({detail})" for name, ok, detail in checks)
        terminalreporter.write_line(f"{status} {k:>2}: {parts}")
