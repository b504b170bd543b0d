import numpy as np
import pytest

from tailcut.estimators.core import SortedSample

pytest_plugins = ["tailcut.pytest.montecarlo"]


def _pareto_values(gamma: float, n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return (1 - rng.random(n)) ** (-gamma)


@pytest.fixture
def pareto_values():
    """Factory for unsorted pure Pareto samples: ``pareto_values(gamma, n, seed)``"""
    return _pareto_values


@pytest.fixture
def pareto_sample():
    """Pure Pareto(1) sample of size 2000"""
    return SortedSample.from_values(_pareto_values(1.0, 2000, seed=7))


@pytest.fixture
def powers_of_two():
    return SortedSample([1.0, 2.0, 4.0, 8.0, 16.0])
