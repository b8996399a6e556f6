import numpy as np
import pytest

from cnls_lab import linops
from cnls_lab.grid import Grid


@pytest.fixture(scope="session")
def grid25():
    return Grid(25.0, 4096)


@pytest.fixture(scope="session")
def grid80():
    return Grid(80.0, 8192)


@pytest.fixture(scope="session")
def profile_A(grid80):
    return linops.solve_A(0.5, 0.3, grid80)


@pytest.fixture(scope="session")
def profile_B(grid80):
    return linops.solve_B(0.5, grid80)


def smooth_decaying(grid, rng, n_terms=3, complex_=True):
    """Random sum of Gaussians with random centers, widths and phases."""
    f = np.zeros(grid.N, dtype=complex if complex_ else float)
    for _ in range(n_terms):
        x0 = rng.uniform(-0.3, 0.3) * grid.L
        w = rng.uniform(0.5, 2.0)
        amp = rng.standard_normal() + (1j * rng.standard_normal() if complex_ else 0)
        f = f + amp * np.exp(-((grid.x - x0) / w) ** 2)
    return f


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import VERDICTS

    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(VERDICTS):
        ok, detail = VERDICTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
