import sys
from pathlib import Path

import pytest

# oracles.py lives next to the tests, not inside the package
sys.path.insert(0, str(Path(__file__).parent))

from swiptlab import derive_seed, sample_channels
from swiptlab.ga import GaConfig, ReTask, solve_re_point


@pytest.fixture(scope="session")
def rayleigh_100k():
    return sample_channels(100_000, derive_seed(2024, "shared", "rayleigh"), "rayleigh-cn01")


def _solve(threshold: float, channels):
    task = ReTask(eh_threshold=threshold)
    cfg = GaConfig(seed=derive_seed(2024, "shared", "ga", threshold))
    return task, cfg, solve_re_point(task, cfg, channels)


@pytest.fixture(scope="session")
def ga_at_th2(rayleigh_100k):
    """Default-config GA solve at threshold 2; reused by several criteria."""
    return _solve(2.0, rayleigh_100k)


@pytest.fixture(scope="session")
def ga_at_th4(rayleigh_100k):
    return _solve(4.0, rayleigh_100k)
