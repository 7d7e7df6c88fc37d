#!/usr/bin/env python3
"""
Shared fixtures for the test suite
"""

import math
import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'src'))

from ground_model import new_ground, new_matroid  # noqa: E402
from objectives import Embeddings, FacilityLocation, ModularObjective, rbf_kernel  # noqa: E402

FIXTURE_B_POINTS = (0.0, 0.1, 1.0, 1.1)
FIXTURE_B_SIGMA = 0.5
MODULAR_WEIGHTS = (3.0, 1.0, 2.0, 1.0)


def rbf(a: float, b: float, sigma: float) -> float:
    return math.exp(-(a - b) ** 2 / (2.0 * sigma ** 2))


def facility_from_points(points, sigma: float) -> FacilityLocation:
    vectors = np.asarray(points, dtype=float)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    return FacilityLocation(rbf_kernel(Embeddings(vectors, sigma)))


def random_facility(rng: np.random.Generator, n: int, dim: int = 2, sigma: float = 1.0) -> FacilityLocation:
    return facility_from_points(rng.uniform(0.0, 3.0, size=(n, dim)), sigma)


def random_sizes(rng: np.random.Generator, n: int, N: int):
    cuts = np.sort(rng.choice(np.arange(1, n), size=N - 1, replace=False))
    return np.diff(np.concatenate([[0], cuts, [n]])).tolist()


@pytest.fixture
def fixture_b():
    """Four points on a line, sigma 0.5, partitions {0,1} and {2,3}"""
    f = facility_from_points(FIXTURE_B_POINTS, FIXTURE_B_SIGMA)
    return f, new_matroid(new_ground([2, 2]))


@pytest.fixture
def modular_fixture():
    """Weights (3, 1, 2, 1), partitions {0,1} and {2,3}, unit budgets"""
    return ModularObjective(MODULAR_WEIGHTS), new_matroid(new_ground([2, 2]))
