import numpy as np
import pytest

from cqoverlap.channel import basis_channel, random_channel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def basis2():
    return basis_channel(2)


@pytest.fixture
def seeded_channel():
    return random_channel(5, 3, 13)


def complex_normal(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_unit(rng, n):
    x = complex_normal(rng, n)
    return x / np.linalg.norm(x)


def random_orthogonal_pair(rng, n):
    u = random_unit(rng, n)
    w = complex_normal(rng, n)
    w = w - u * np.vdot(u, w)
    return u, w / np.linalg.norm(w)
