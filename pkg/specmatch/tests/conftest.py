"""Pytest configuration and fixtures"""
import numpy as np
import pytest
from click.testing import CliRunner

from app.config import settings
from app.models import gen_er_pair, gen_gaussian_pair


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: desk-scale acceptance runs (n >= 500)")


@pytest.fixture
def runner():
    """Click test runner"""
    return CliRunner()


@pytest.fixture
def no_env_workers(monkeypatch):
    """Ignore SPECMATCH_WORKERS from the environment"""
    monkeypatch.setattr(settings, "WORKERS", None)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def small_er_pair():
    """Noisy ER pair with a random truth"""
    return gen_er_pair(30, 0.5, 0.9, seed=7)


@pytest.fixture
def zero_noise_er_pair():
    return gen_er_pair(40, 0.5, 1.0, seed=3)


@pytest.fixture
def small_gaussian_pair():
    return gen_gaussian_pair(6, 0.4, seed=11)


@pytest.fixture
def diag12():
    """a = b = diag(1, 2): standard-basis eigenvectors, closed-form similarity"""
    return np.diag([1.0, 2.0])


@pytest.fixture
def random_symmetric(rng):
    """Factory for dense symmetric test matrices of size n"""

    def make(n: int) -> np.ndarray:
        m = rng.standard_normal((n, n)) / np.sqrt(n)
        return (m + m.T) / 2.0

    return make
