#!/usr/bin/env python3
"""
Tests for the objective oracles
"""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import FIXTURE_B_POINTS, FIXTURE_B_SIGMA, facility_from_points, random_facility, rbf
from errors import ConstructionError, DimensionError, ParameterError, PreconditionError
from ground_model import new_ground
from objectives import (Embeddings, KernelMatrix, ModularObjective, RatingObjective, WeightedCoverage,
                        class_similarity, facility_eval, marginal_gain, modular_eval, partition_similarity,
                        rbf_kernel, weighted_coverage)


class TestRBFKernel:

    def test_identical_points(self):
        k = rbf_kernel(Embeddings(np.zeros((2, 3)), 1.0))
        np.testing.assert_array_equal(k.k, np.ones((2, 2)))

    def test_values(self):
        k = rbf_kernel(Embeddings(np.array([[0.0], [1.0]]), 1.0)).k
        assert k[0, 1] == pytest.approx(math.exp(-0.5), abs=1e-15)
        assert k[1, 0] == pytest.approx(math.exp(-0.5), abs=1e-15)

    def test_diagonal_is_one(self):
        rng = np.random.default_rng(3)
        k = rbf_kernel(Embeddings(rng.normal(size=(5, 2)), 0.7)).k
        np.testing.assert_allclose(np.diag(k), 1.0)
        np.testing.assert_allclose(k, k.T)

    @pytest.mark.parametrize('sigma', [0.0, -1.0])
    def test_rejects_nonpositive_sigma(self, sigma):
        with pytest.raises(ParameterError):
            rbf_kernel(Embeddings(np.zeros((2, 2)), sigma))

    def test_client_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            rbf_kernel(Embeddings(np.zeros((2, 2)), 1.0), clients=np.zeros((3, 3)))

    @given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.floats(-10, 10))
    @settings(max_examples=40, deadline=None)
    def test_translation_invariance(self, coords, shift):
        points = np.asarray(coords)[:, None]
        a = rbf_kernel(Embeddings(points, 1.3)).k
        b = rbf_kernel(Embeddings(points + shift, 1.3)).k
        np.testing.assert_allclose(a, b, atol=1e-9)

    def test_kernel_matrix_validation(self):
        with pytest.raises(ConstructionError):
            KernelMatrix(np.array([[1.5]]))
        with pytest.raises(ConstructionError):
            KernelMatrix(np.array([[np.nan]]))
        with pytest.raises(ConstructionError):
            KernelMatrix(np.array([1.0, 0.5]))


class TestFacilityLocation:

    def test_fixture_b_value(self, fixture_b):
        f, _ = fixture_b
        assert facility_eval([0, 2], f) == pytest.approx(3.9603973466135106, abs=1e-12)
        assert facility_eval([0, 2], f) == pytest.approx(2.0 + 2.0 * math.exp(-0.02), abs=1e-12)

    def test_empty_set_is_zero(self, fixture_b):
        f, _ = fixture_b
        assert facility_eval([], f) == 0.0

    def test_singleton(self, fixture_b):
        f, _ = fixture_b
        expected = sum(rbf(p, FIXTURE_B_POINTS[0], FIXTURE_B_SIGMA) for p in FIXTURE_B_POINTS)
        assert f.evaluate([0]) == pytest.approx(expected, abs=1e-12)

    def test_out_of_range_subset(self, fixture_b):
        f, _ = fixture_b
        with pytest.raises(DimensionError):
            f.evaluate([4])


def random_oracle(kind: str, rng: np.random.Generator, n: int):
    if kind == 'facility':
        return random_facility(rng, n)
    if kind == 'rating':
        ratings = rng.integers(0, 6, size=(7, n)).astype(float)
        return RatingObjective(ratings)
    if kind == 'modular':
        return ModularObjective(rng.uniform(0.0, 4.0, size=n))
    sets = [np.flatnonzero(rng.random(10) < 0.3).tolist() for _ in range(n)]
    return WeightedCoverage(sets, rng.uniform(0.5, 2.0, size=10))


@pytest.mark.parametrize('kind', ['facility', 'rating', 'modular', 'coverage'])
def test_oracle_is_normalized_monotone_submodular(kind):
    rng = np.random.default_rng(11)
    n = 7
    f = random_oracle(kind, rng, n)
    assert f.evaluate([]) == 0.0
    checked = 0
    while checked < 200:
        B = set(np.flatnonzero(rng.random(n) < 0.5).tolist())
        A = {j for j in B if rng.random() < 0.5}
        outside = [j for j in range(n) if j not in B]
        if not outside:
            continue
        j = int(rng.choice(outside))
        assert marginal_gain(A, j, f) >= marginal_gain(B, j, f) - 1e-12
        assert f.evaluate(A) <= f.evaluate(B) + 1e-12
        checked += 1


class TestRatingObjective:

    def test_uniform_ratings(self):
        f = RatingObjective(np.full((2, 2), 5.0))
        assert f.evaluate([0]) == pytest.approx(5.0)
        assert f.n_users == 2

    def test_average_of_best(self):
        f = RatingObjective(np.array([[5.0, 0.0, 1.0], [0.0, 3.0, 0.0], [2.0, 0.0, 4.0]]))
        assert f.evaluate([0, 1]) == pytest.approx((5.0 + 3.0 + 2.0) / 3.0)
        assert f.evaluate([2]) == pytest.approx((1.0 + 0.0 + 4.0) / 3.0)

    def test_rejects_negative(self):
        with pytest.raises(ConstructionError):
            RatingObjective(np.array([[-1.0]]))


class TestModularAndCoverage:

    def test_modular(self):
        m = ModularObjective([3, 1, 2, 1])
        assert modular_eval([0, 2], m) == 5.0
        assert modular_eval([], m) == 0.0

    def test_modular_rejects_negative(self):
        with pytest.raises(ConstructionError):
            ModularObjective([1.0, -1.0])

    def test_coverage(self):
        f = weighted_coverage([[0, 1], [1, 2], [3]], [1.0, 2.0, 3.0, 4.0])
        assert f.evaluate([0, 1]) == 6.0
        assert f.evaluate([0, 2]) == 7.0
        assert f.evaluate([]) == 0.0

    def test_coverage_default_weights(self):
        f = WeightedCoverage([[0, 1], [1]])
        assert f.evaluate([0, 1]) == 2.0

    def test_coverage_needs_weight_per_item(self):
        with pytest.raises(ConstructionError):
            WeightedCoverage([[0, 3]], [1.0])


class TestGainPairs:
    """Vectorized gain pairs agree with direct evaluation"""

    @pytest.mark.parametrize('make', [
        lambda rng: random_facility(rng, 7),
        lambda rng: RatingObjective(rng.integers(0, 6, size=(5, 7)).astype(float)),
        lambda rng: ModularObjective(rng.integers(0, 5, size=7).astype(float)),
        lambda rng: WeightedCoverage([rng.choice(6, size=2, replace=False).tolist() for _ in range(7)],
                                     rng.uniform(0.5, 2.0, size=6)),
    ])
    def test_matches_evaluate(self, make):
        rng = np.random.default_rng(5)
        f = make(rng)
        elements = np.arange(f.n)
        for _ in range(20):
            mask = rng.random(f.n) < 0.4
            with_j, without_j = f.gain_pairs(mask, elements)
            members = set(np.flatnonzero(mask).tolist())
            for j in range(f.n):
                assert with_j[j] == pytest.approx(f.evaluate(members | {j}), abs=1e-12)
                assert without_j[j] == pytest.approx(f.evaluate(members - {j}), abs=1e-12)


class TestMarginalGain:

    def test_examples(self, modular_fixture):
        f, _ = modular_fixture
        assert marginal_gain({0}, 2, f) == 2.0
        assert marginal_gain({0}, 0, f) == 0.0

    def test_invalid_element(self, modular_fixture):
        f, _ = modular_fixture
        with pytest.raises(DimensionError):
            marginal_gain(set(), 7, f)

    def test_non_monotone_objective(self):
        class Decreasing(ModularObjective):
            def evaluate(self, subset):
                return -float(len(self._indices(subset)))

        with pytest.raises(PreconditionError):
            marginal_gain(set(), 0, Decreasing([1.0, 1.0]))


class TestPartitionSimilarity:

    def test_fixture_b_blocks(self, fixture_b):
        f, m = fixture_b
        coupling = partition_similarity(f.kernel, m.ground)
        assert coupling.shape == (2, 2)
        assert coupling[0, 0] == pytest.approx((2.0 + 2.0 * math.exp(-0.02)) / 4.0)
        np.testing.assert_allclose(coupling, coupling.T)

    def test_needs_square_kernel(self):
        kernel = KernelMatrix(np.ones((2, 3)))
        with pytest.raises(DimensionError):
            partition_similarity(kernel, new_ground([3]))


class TestClassSimilarity:

    def test_contiguous_labels_match_partitions(self, fixture_b):
        f, m = fixture_b
        np.testing.assert_allclose(class_similarity(f.kernel, [0, 0, 1, 1]),
                                   partition_similarity(f.kernel, m.ground))

    def test_interleaved_labels(self, fixture_b):
        f, _ = fixture_b
        coupling = class_similarity(f.kernel, [7, 3, 7, 3])
        k = f.kernel.k
        assert coupling.shape == (2, 2)
        assert coupling[0, 0] == pytest.approx((k[1, 1] + k[1, 3] + k[3, 1] + k[3, 3]) / 4.0)
        assert coupling[0, 1] == pytest.approx((k[1, 0] + k[1, 2] + k[3, 0] + k[3, 2]) / 4.0)
        np.testing.assert_allclose(coupling, coupling.T)

    def test_needs_label_per_element(self, fixture_b):
        f, _ = fixture_b
        with pytest.raises(DimensionError):
            class_similarity(f.kernel, [0, 1, 1])


def test_facility_from_points_matches_hand_kernel():
    f = facility_from_points([0.0, 2.0], 1.0)
    for a, b in itertools.product(range(2), repeat=2):
        assert f.kernel.k[a, b] == pytest.approx(rbf([0.0, 2.0][a], [0.0, 2.0][b], 1.0))
