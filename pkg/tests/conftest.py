import numpy as np
import pytest

from zkblowup.grid import make_grid
from zkblowup.ground_state import petviashvili

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def small_grid():
    return make_grid(64, 64, 12.0, 12.0)


@pytest.fixture(scope="session")
def gs_small():
    """Ground state on a 256^2 grid over [-16, 16)^2; h = 0.125 resolves the spectrum of Q."""
    gs = petviashvili(make_grid(256, 256, 16.0, 16.0))
    assert gs.converged
    return gs


@pytest.fixture(scope="session")
def gs_small_fd2():
    gs = petviashvili(make_grid(128, 128, 16.0, 16.0), scheme="fd2")
    assert gs.converged
    return gs


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
