#!/usr/bin/env python3
"""
Tests for curvature, the effective rate and the safe threshold
"""

import math

import numpy as np
import pytest

from conftest import facility_from_points, random_facility, random_sizes
from curvature import (brute_force_curvature, effective_rate, partition_curvature, safe_threshold,
                       total_curvature)
from errors import CapacityError, DegenerateObjectiveError, ParameterError
from greedy_algorithms import GradientMode, RunConfig, atcg
from ground_model import new_ground, new_matroid
from objectives import ModularObjective


class TestTotalCurvature:

    def test_modular_is_zero(self, modular_fixture):
        f, m = modular_fixture
        report = total_curvature(f, m.ground)
        assert report.c_total == 0.0
        assert report.c_partition == (0.0, 0.0)
        assert report.tau_star == 1.0

    def test_duplicate_elements_give_one(self):
        f = facility_from_points([0.0, 0.0, 1.0], 1.0)
        report = total_curvature(f, new_ground([2, 1]))
        assert report.c_total == 1.0
        assert report.c_partition[0] == 1.0
        assert report.tau_star == 0.0
        assert report.witness.element in (0, 1)

    def test_fixture_b_matches_brute_force(self, fixture_b):
        f, m = fixture_b
        report = total_curvature(f, m.ground)
        assert report.c_total == pytest.approx(brute_force_curvature(f, m.ground), abs=1e-12)
        for i in range(m.ground.N):
            expected = brute_force_curvature(f, m.ground, m.ground.elements(i))
            assert report.c_partition[i] == pytest.approx(expected, abs=1e-12)
            assert partition_curvature(f, m.ground, i) == pytest.approx(expected, abs=1e-12)

    def test_partition_curvature_bounded_by_total(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            f = random_facility(rng, 8)
            ground = new_ground(random_sizes(rng, 8, 3))
            report = total_curvature(f, ground)
            assert all(0.0 <= c <= report.c_total + 1e-15 for c in report.c_partition)

    def test_zero_singletons_are_skipped(self):
        f = ModularObjective([0.0, 2.0, 1.0])
        report = total_curvature(f, new_ground([1, 2]))
        assert report.skipped == (0,)
        assert report.c_partition == (0.0, 0.0)
        assert report.partition_witnesses[0] is None
        with pytest.raises(DegenerateObjectiveError):
            partition_curvature(f, new_ground([1, 2]), 0)

    def test_all_zero_objective(self):
        with pytest.raises(DegenerateObjectiveError):
            total_curvature(ModularObjective([0.0, 0.0]), new_ground([2]))

    def test_report_dict(self, fixture_b):
        f, m = fixture_b
        data = total_curvature(f, m.ground).to_dict()
        assert set(data) >= {'c_total', 'c_partition', 'tau_star', 'safe_threshold', 'witness'}
        assert data['safe_threshold'] == pytest.approx(1.0 - max(data['c_partition']))


class TestBruteForceCurvature:

    def test_modular(self):
        assert brute_force_curvature(ModularObjective([1.0, 2.0, 3.0]), new_ground([3])) == 0.0

    def test_capacity(self):
        with pytest.raises(CapacityError):
            brute_force_curvature(ModularObjective(np.ones(13)), new_ground([13]))


class TestEffectiveRate:

    def test_modular_recovers_classical_rate(self):
        rate = effective_rate(0.3, 0.0)
        assert rate.tau_eff == 1.0
        assert rate.bound == pytest.approx(1 - 1 / math.e, abs=1e-6)

    def test_threshold_below_curvature_rate(self):
        rate = effective_rate(0.3, 0.5)
        assert rate.tau_eff == 0.5
        assert rate.bound == pytest.approx(0.393469, abs=1e-6)

    def test_unit_threshold(self):
        assert effective_rate(1.0, 0.8).tau_eff == 1.0

    @pytest.mark.parametrize('tau, c', [(0.0, 0.5), (1.2, 0.5), (0.5, -0.1), (0.5, 1.1)])
    def test_domain(self, tau, c):
        with pytest.raises(ParameterError):
            effective_rate(tau, c)


def test_safe_threshold_keeps_one_active_element():
    f = facility_from_points([0.0, 2.0, 4.0, 6.0], 0.5)
    m = new_matroid(new_ground([2, 2]))
    report = total_curvature(f, m.ground)
    tau = 0.9 * safe_threshold(report)
    assert tau > 0.5
    trace = atcg(f, m, RunConfig(T=50, tau=tau, gradient_mode=GradientMode.EXACT))
    assert [len(a) for a in trace.active_sets] == [1, 1]
    assert trace.C_T == m.ground.N
