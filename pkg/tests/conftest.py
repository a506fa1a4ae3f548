import numpy as np
import pytest

_ACCEPTANCE = {}


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    def report(label, ok, detail=""):
        _ACCEPTANCE[label] = (bool(ok), detail)
        print(f"[{'PASS' if ok else 'FAIL'}] {label} {detail}".rstrip())
        return ok
    return report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[label]
        terminalreporter.write_line(
            f"[{'PASS' if ok else 'FAIL'}] {label} {detail}".rstrip())


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
