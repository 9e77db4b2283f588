import numpy as np
import pytest

from isingopt import _backend
from isingopt.ising import IsingModel

BACKENDS = _backend.available()


def dense_random_model(rng, n, density=1.0, field_scale=1.0):
    J = {(i, j): float(rng.normal()) for i in range(n) for j in range(i + 1, n) if rng.random() < density}
    return IsingModel(n, J, field_scale * rng.normal(size=n))


def random_state(rng, n):
    return (rng.integers(0, 2, size=n) * 2 - 1).astype(np.int8)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
