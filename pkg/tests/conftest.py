import sys

import numpy as np
import pytest

from hexmass.hex8 import CORNERS, Hex8, validity_scan


def rel_err(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.abs(a - b).max() / np.abs(b).max())


def random_parallelepiped(rng) -> Hex8:
    while True:
        a = np.eye(3) + rng.uniform(-0.6, 0.6, size=(3, 3))
        if np.linalg.det(a) > 0.2:
            break
    scale = rng.uniform(0.1, 10.0)
    return Hex8.parallelepiped(rng.uniform(-5, 5, 3), *(scale * a))


def random_hex(rng, amplitude=0.3) -> Hex8:
    """Distorted (generally non-parallelepiped) brick with a positive metric everywhere."""
    while True:
        a = np.eye(3) + rng.uniform(-0.3, 0.3, size=(3, 3))
        nodes = (CORNERS + rng.uniform(-amplitude, amplitude, size=(8, 3))) @ a.T
        nodes = nodes * rng.uniform(0.2, 3.0) + rng.uniform(-3, 3, 3)
        h = Hex8(nodes)
        if validity_scan(h, 7).min_J > 0:
            return h


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
