"""Shared fixtures"""
import math

import numpy as np
import pytest

from models.constants import ProblemConstants
from models.dataset import Dataset


def random_dataset(n: int, p: int, rng: np.random.Generator) -> Dataset:
    """Covariates in [-1, 1]^p, logistic treatment assignment, both arms guaranteed"""
    X = rng.uniform(-1.0, 1.0, size=(n, p))
    logits = 0.6 * X[:, 0] - 0.4 * X[:, min(1, p - 1)]
    a = np.where(rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-logits)), 1, -1)
    a[0], a[1] = 1, -1
    y = np.clip(X[:, 0] * a + 0.5 * rng.standard_normal(n), -3.0, 3.0)
    return Dataset(X, a, y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def make_dataset():
    return random_dataset


@pytest.fixture
def dataset(rng):
    return random_dataset(60, 3, rng)


@pytest.fixture
def constants():
    """Bounds matching random_dataset with p = 3"""
    return ProblemConstants.for_itr(M=math.sqrt(3.0), M_out=3.0, lambda1=5.0)
