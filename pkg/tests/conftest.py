from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ROOT = Path(__file__).resolve().parents[1]
MNIST_DIR = ROOT / "data" / "mnist"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def mnist_dir():
    """IDX copy of the MNIST digits, exported from mlxtend's bundled sample when absent."""
    if not (MNIST_DIR / "train-images-idx3-ubyte").exists():
        pytest.importorskip("mlxtend")
        from qsea.data import export_mlxtend_mnist

        export_mlxtend_mnist(MNIST_DIR)
    return MNIST_DIR


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
