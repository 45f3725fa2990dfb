import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmaslab.landscape import (Landscape, FlockingConfig, build_landscape,
                               ball_masks, hamming, hamming_ball, flip_dim,
                               point_from_bits, point_to_bits, point_to_str,
                               point_from_str)
from conftest import brute_force_base_fitness


class TestPointHelpers:
    def test_round_trip(self):
        for p in (0, 1, 5, 31):
            assert point_from_bits(point_to_bits(p, 5)) == p

    def test_dimension_zero_is_most_significant(self):
        assert point_from_bits([1, 0, 0]) == 4
        assert point_to_bits(4, 3) == (1, 0, 0)

    def test_str_round_trip(self):
        assert point_to_str(5, 5) == "00101"
        assert point_from_str("00101") == 5

    def test_flip_dim(self):
        assert flip_dim(0b00000, 0, 5) == 0b10000
        assert flip_dim(0b00000, 4, 5) == 0b00001

    def test_hamming(self):
        assert hamming(0b1010, 0b0110) == 2


class TestBuildLandscape:
    def test_shape_3_2(self):
        assert build_landscape(3, 2, seed=1).table.shape == (3, 8)

    def test_shape_10_3(self):
        assert build_landscape(10, 3, seed=1).table.shape == (10, 16)

    def test_deterministic(self):
        a = build_landscape(6, 2, seed=42)
        b = build_landscape(6, 2, seed=42)
        assert np.array_equal(a.table, b.table)

    def test_entries_uniform_range(self):
        l = build_landscape(8, 3, seed=7)
        assert (l.table >= 0).all() and (l.table < 1).all()

    def test_fresh_state(self):
        l = build_landscape(6, 2, seed=3)
        assert all(l.multiplier(p) == 1.0 for p in range(1 << 6))
        assert all(l.visit_count(p) == 0 for p in range(1 << 6))

    def test_invalid_ranges(self):
        with pytest.raises(ValueError):
            build_landscape(0, 0, seed=1)
        with pytest.raises(ValueError):
            build_landscape(31, 3, seed=1)
        with pytest.raises(ValueError):
            build_landscape(5, 5, seed=1)
        with pytest.raises(ValueError):
            build_landscape(5, -1, seed=1)


class TestBaseFitness:
    def test_constant_table(self):
        l = Landscape(4, 1, np.full((4, 4), 0.7))
        for p in range(16):
            assert l.base_fitness(p) == pytest.approx(0.7)

    def test_hand_example_n3_k2(self):
        # entries[i][key] = key / 8; fitness(010) averages keys 010, 100, 001
        table = np.tile(np.arange(8) / 8.0, (3, 1))
        l = Landscape(3, 2, table)
        assert l.base_fitness(0b010) == pytest.approx((2 + 4 + 1) / 24)

    def test_k0_flip_delta(self):
        n = 8
        l = build_landscape(n, 0, seed=11)
        for p in range(1 << n):
            for i in range(n):
                b = (p >> (n - 1 - i)) & 1
                delta = (l.table[i][1 - b] - l.table[i][b]) / n
                assert l.base_fitness(flip_dim(p, i, n)) - l.base_fitness(p) \
                    == pytest.approx(delta)

    @pytest.mark.parametrize("n,k,seed", [(6, 0, 1), (8, 3, 2), (10, 4, 3),
                                          (12, 2, 4)])
    def test_matches_brute_force(self, n, k, seed):
        l = build_landscape(n, k, seed)
        for p in range(1 << n):
            assert l.base_fitness(p) == pytest.approx(
                brute_force_base_fitness(l.table, n, k, p), abs=1e-12)

    def test_sparse_fallback_matches_dense(self):
        # above the dense limit the dict-backed path must agree
        table = np.random.default_rng(5).random((21, 2))
        sparse = Landscape(21, 0, table)
        assert not sparse._dense
        for p in (0, 1, 12345, (1 << 21) - 1):
            assert sparse.base_fitness(p) == pytest.approx(
                brute_force_base_fitness(table, 21, 0, p), abs=1e-12)

    def test_point_out_of_range(self):
        l = build_landscape(4, 1, seed=1)
        with pytest.raises(ValueError):
            l.base_fitness(16)
        with pytest.raises(ValueError):
            l.base_fitness(-1)


class TestHammingBall:
    def test_radius_zero(self):
        assert hamming_ball(13, 0, 5) == {13}

    def test_n20_radius2_size(self):
        assert len(hamming_ball(0, 2, 20)) == 211

    def test_n10_radius2_size(self):
        assert len(hamming_ball(0, 2, 10)) == 56

    def test_membership(self):
        ball = hamming_ball(0b10110, 2, 5)
        assert all(hamming(p, 0b10110) <= 2 for p in ball)
        assert len(ball) == 1 + 5 + 10

    def test_invalid_radius(self):
        with pytest.raises(ValueError):
            hamming_ball(0, 6, 5)

    def test_masks_count(self):
        assert len(ball_masks(10, 2)) == 56


class TestFlockingConfig:
    def test_defaults(self):
        fl = FlockingConfig()
        assert (fl.intensity_start, fl.intensity_end) == (1.05, 0.9)
        assert (fl.decay_visits, fl.radius) == (10, 2)

    def test_intensity_endpoints(self):
        fl = FlockingConfig()
        assert fl.intensity(1) == pytest.approx(1.05)
        assert fl.intensity(11) == pytest.approx(0.9)
        assert fl.intensity(50) == pytest.approx(0.9)

    def test_intensity_linear(self):
        fl = FlockingConfig()
        for v in range(1, 12):
            expected = 1.05 + (0.9 - 1.05) * min(v - 1, 10) / 10
            assert fl.intensity(v) == pytest.approx(expected)

    def test_disabled(self):
        fl = FlockingConfig.disabled()
        assert fl.intensity(1) == fl.intensity(100) == 1.0

    def test_validation(self):
        with pytest.raises(ValueError):
            FlockingConfig(decay_visits=0)
        with pytest.raises(ValueError):
            FlockingConfig(radius=-1)


class TestCurrentFitness:
    def test_untouched_equals_base(self):
        l = build_landscape(6, 2, seed=9)
        for p in range(1 << 6):
            assert l.current_fitness(p) == l.base_fitness(p)

    def test_single_boost(self):
        l = Landscape(4, 0, np.full((4, 2), 0.5))
        l.apply_visits([0])
        assert l.current_fitness(0) == pytest.approx(0.5 * 1.05)

    def test_clamp_upper(self):
        l = Landscape(4, 0, np.full((4, 2), 0.8))
        l.multipliers[3] = 1.5
        assert l.current_fitness(3) == 1.0


class TestApplyVisits:
    def test_first_visit_boosts_whole_ball(self):
        l = build_landscape(10, 3, seed=2)
        center = 0b1010101010
        l.apply_visits([center])
        for p in hamming_ball(center, 2, 10):
            assert l.multiplier(p) == pytest.approx(1.05)
        assert l.visit_count(center) == 1

    def test_first_visit_n20_touches_211_points(self):
        l = build_landscape(20, 3, seed=2)
        l.apply_visits([7])
        touched = np.flatnonzero(l.multipliers != 1.0)
        assert len(touched) == 211
        assert set(touched) == hamming_ball(7, 2, 20)

    def test_eleventh_visit_intensity(self):
        l = build_landscape(8, 0, seed=4)
        for _ in range(10):
            l.apply_visits([0])
        before = l.multiplier(0)
        l.apply_visits([0])
        assert l.multiplier(0) == pytest.approx(before * 0.9)

    def test_distance_3_untouched(self):
        l = build_landscape(10, 3, seed=2)
        l.apply_visits([0])
        assert l.multiplier(0b1110000000) == 1.0

    def test_pending_cleared(self):
        l = build_landscape(5, 1, seed=1)
        pending = [3, 9]
        l.apply_visits(pending)
        assert pending == []

    def test_deterministic(self):
        visits = [3, 9, 3, 17, 30]
        states = []
        for _ in range(2):
            l = build_landscape(5, 1, seed=1)
            l.apply_visits(list(visits))
            states.append((l.multipliers.copy(), l.visit_counts.copy()))
        assert np.array_equal(states[0][0], states[1][0])
        assert np.array_equal(states[0][1], states[1][1])

    def test_same_point_twice_in_one_step(self):
        l = build_landscape(6, 1, seed=8)
        l.apply_visits([5, 5])
        assert l.visit_count(5) == 2
        fl = l.flocking
        assert l.multiplier(5) == pytest.approx(fl.intensity(1) * fl.intensity(2))

    def test_repeated_boosting_saturates_high(self):
        fl = FlockingConfig(intensity_start=1.05, intensity_end=1.05)
        l = Landscape(6, 0, np.full((6, 2), 0.5), fl)
        last = l.current_fitness(0)
        for _ in range(200):
            l.apply_visits([0])
            f = l.current_fitness(0)
            assert f >= last
            last = f
        assert last == 1.0

    def test_repeated_crowding_sinks_low(self):
        fl = FlockingConfig(intensity_start=0.9, intensity_end=0.9)
        l = Landscape(6, 0, np.full((6, 2), 0.5), fl)
        last = l.current_fitness(0)
        for _ in range(200):
            l.apply_visits([0])
            f = l.current_fitness(0)
            assert f <= last
            last = f
        assert last == pytest.approx(0.0, abs=1e-6)

    def test_sparse_path_matches_dense(self):
        # run the same visit sequence through dense and dict-backed overlays
        table = np.random.default_rng(6).random((10, 2))
        dense = Landscape(10, 0, table)
        sparse = Landscape(10, 0, table)
        sparse._dense = False
        sparse._base_cache = {}
        sparse.multipliers, sparse.visit_counts = {}, {}
        sparse._masks = ball_masks(10, 2)
        visits = [5, 900, 5, 123]
        dense.apply_visits(list(visits))
        sparse.apply_visits(list(visits))
        for p in range(1 << 10):
            assert sparse.multiplier(p) == pytest.approx(dense.multiplier(p),
                                                         abs=1e-12)
            assert sparse.visit_count(p) == dense.visit_count(p)

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.lists(st.integers(0, 63), max_size=6), max_size=8))
    def test_fitness_stays_in_unit_interval(self, steps):
        l = build_landscape(6, 2, seed=13)
        for pending in steps:
            l.apply_visits(list(pending))
        for p in range(64):
            assert 0.0 <= l.current_fitness(p) <= 1.0
