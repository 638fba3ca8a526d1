import numpy as np
import pytest

# Grid used by the brute-force prox oracle: step 1e-4 on [-10, 10].
PROX_GRID = np.linspace(-10.0, 10.0, 200_001)


def grid_prox_min(cost, x, gamma):
    """Smallest value of ``cost(z) + (z - x)^2 / (2 gamma)`` over the grid,
    with the exact candidates 0 and x added so kinks are not missed."""
    z = np.concatenate([PROX_GRID, [0.0, x]])
    return float(np.min(cost(z) + (z - x) ** 2 / (2.0 * gamma)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


_ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance(capsys):
    """``acceptance(n, title, ok, detail)`` prints one PASS/FAIL line (also
    repeated in the terminal summary) and returns ``ok``."""

    def record(number, title, ok, detail=""):
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
        _ACCEPTANCE_LINES.append((number, line))
        with capsys.disabled():
            print("\n" + line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
