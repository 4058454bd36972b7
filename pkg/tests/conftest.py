import numpy as np
import pytest

from lips import _kernels
from lips.dataset import CategoricalDataset, Variable

BACKENDS = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])


def make_dataset(rng, n, level_counts, pos_rate=0.3):
    """Random categorical data with both classes present."""
    variables = tuple(
        Variable(f"V{j}", tuple(str(l) for l in range(m))) for j, m in enumerate(level_counts)
    )
    rows = np.column_stack([rng.integers(0, m, n) for m in level_counts]) if level_counts else np.zeros((n, 0))
    y = (rng.random(n) < pos_rate).astype(np.int8)
    y[0], y[-1] = 1, 0
    return CategoricalDataset(variables, rows, y)


def binary_vars(names):
    return tuple(Variable(name, ("0", "1")) for name in names)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion")[1].split("]")[0])):
            terminalreporter.write_line(line)
