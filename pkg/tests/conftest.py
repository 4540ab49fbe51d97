import numpy as np
import pytest

from logicmix.datasets import PartialDataset

# filled by test_acceptance; printed after the run so `pytest -v` shows one line per criterion
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def tiny_dataset(n=6, c=4, shape=(4, 4, 3), seed=0, p_unknown=0.4):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, size=(n, c)).astype(np.int8)
    labels[rng.random((n, c)) < p_unknown] = -1
    images = rng.random((n, *shape), dtype=np.float32)
    return PartialDataset([f"c{k}" for k in range(c)], [f"s{i}" for i in range(n)], labels,
                          images=images)


@pytest.fixture
def dataset():
    return tiny_dataset()


@pytest.fixture
def two_sample_dataset():
    return PartialDataset(["cat", "dog", "car"], ["a", "b"],
                          np.array([[1, 0, -1], [1, 1, 0]], dtype=np.int8))
