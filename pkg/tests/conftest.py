"""conftest file for pytest"""
import os

import numpy as np
import pytest

from mcd_density.datasets import SupervisedDataset

FIXTURES_DIR = os.path.join(os.path.dirname(os.path.realpath(__file__)), "fixtures")


@pytest.fixture
def rng():
    """Fresh random generator with a fixed seed."""
    return np.random.default_rng(1234)


@pytest.fixture
def distinct_dataset():
    """Supervised dataset of 100 rows with pairwise distinct observations and targets."""
    generator = np.random.default_rng(7)
    X = generator.normal(size=(100, 3))
    Y = X @ np.array([0.5, -0.25, 1.0]) + 0.3 * generator.normal(size=100)
    return SupervisedDataset(X=X, Y=Y)


@pytest.fixture
def clean_config(monkeypatch):
    """Remove MCD_* variables from the environment so that config tests only see their own settings."""
    for name in list(os.environ):
        if name.upper().startswith("MCD_"):
            monkeypatch.delenv(name)
