import numpy as np
import pytest

# criterion number -> (passed, detail); filled by the acceptance tests
ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    # keys are criterion numbers, optionally with a suffix ("8s")
    for key in sorted(ACCEPTANCE, key=lambda k: (int(str(k).rstrip("s")), str(k))):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key!s:>3}: {'PASS' if ok else 'FAIL'}  {detail}")
