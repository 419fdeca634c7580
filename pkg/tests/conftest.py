import numpy as np
import pytest

from orthoseries import build_basis, make_weight


@pytest.fixture(scope="session")
def legendre():
    return build_basis(make_weight("jacobi", 0.0, 0.0), 400)


@pytest.fixture(scope="session")
def jac():
    return build_basis(make_weight("jacobi", -0.25, -0.25), 400)


def jacobi_recurrence(alpha, beta, k):
    """Analytic monic Jacobi recurrence: returns a[0..k-1], sqrt(b[1..k-1])."""
    a, b = alpha, beta
    j = np.arange(k, dtype=float)
    s = 2 * j + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = (b * b - a * a) / (s * (s + 2))
    diag[0] = (b - a) / (a + b + 2)
    jj = np.arange(1, k, dtype=float)
    s = 2 * jj + a + b
    with np.errstate(divide="ignore", invalid="ignore"):
        off2 = 4 * jj * (jj + a) * (jj + b) * (jj + a + b) / (s * s * (s + 1) * (s - 1))
    off2[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
    return diag, np.sqrt(off2)


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
