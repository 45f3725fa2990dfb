import numpy as np
import pytest

from cmaslab.analysis import (StrategyEnsemble, pca_project, welch_t_test,
                              count_prior_visits, aggregate_occupancy)
from cmaslab.landscape import FlockingConfig
from cmaslab.simulation import (EnvironmentConfig, StepRecord, RunTrace,
                                run_simulation, evaluate_strategy)
from cmaslab.strategy import StateOccupancy, strategy_to_vector
from cmaslab.harness import manual_strategy, manual_catalog


def random_vectors(m, rng):
    raw = rng.random((m, 20))
    return raw / raw.sum(axis=1, keepdims=True) * 5  # arbitrary scale, shape (m, 20)


class TestPca:
    def test_collinear_vectors_single_component(self):
        rng = np.random.default_rng(0)
        direction = rng.random(20)
        base = rng.random(20)
        vecs = np.array([base + t * direction for t in np.linspace(0, 1, 9)])
        res = pca_project(StrategyEnsemble(vecs, ["x"] * 9, [0.0] * 9))
        assert res.explained_variance[0] == pytest.approx(1.0, abs=1e-9)

    def test_two_clusters_separate(self):
        rng = np.random.default_rng(1)
        a = rng.normal(0.0, 0.01, size=(10, 20))
        b = rng.normal(1.0, 0.01, size=(10, 20))
        vecs = np.vstack([a, b])
        res = pca_project(StrategyEnsemble(vecs, ["a"] * 10 + ["b"] * 10,
                                           [0.0] * 20))
        ca, cb = res.coordinates[:10], res.coordinates[10:]
        assert max(ca) < min(cb) or min(ca) > max(cb)

    def test_projection_zero_mean(self):
        rng = np.random.default_rng(2)
        vecs = random_vectors(12, rng)
        res = pca_project(StrategyEnsemble(vecs, [""] * 12, [0.0] * 12))
        assert abs(res.coordinates.mean()) < 1e-9

    def test_sign_oriented_toward_private_mass(self):
        pub = strategy_to_vector(manual_strategy("exploit", "public"))
        priv = strategy_to_vector(manual_strategy("exploit", "private"))
        vecs = np.array([pub] * 5 + [priv] * 5)
        res = pca_project(StrategyEnsemble(vecs, [""] * 10, [0.0] * 10))
        assert res.coordinates[-1] > res.coordinates[0]

    def test_reconstruction(self):
        rng = np.random.default_rng(3)
        vecs = random_vectors(15, rng)
        res = pca_project(StrategyEnsemble(vecs, [""] * 15, [0.0] * 15))
        centered = vecs - res.mean
        rebuilt = (centered @ res.components) @ res.components.T
        assert np.allclose(rebuilt, centered, atol=1e-9)

    def test_variance_fractions(self):
        rng = np.random.default_rng(4)
        vecs = random_vectors(30, rng)
        res = pca_project(StrategyEnsemble(vecs, [""] * 30, [0.0] * 30))
        ev = res.explained_variance
        assert ev.sum() == pytest.approx(1.0)
        assert all(ev[i] >= ev[i + 1] - 1e-12 for i in range(len(ev) - 1))

    def test_degenerate_ensemble_rejected(self):
        vecs = np.tile(np.full(20, 0.3), (5, 1))
        with pytest.raises(ValueError):
            pca_project(StrategyEnsemble(vecs, [""] * 5, [0.0] * 5))

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            StrategyEnsemble(np.ones((3, 19)), [""] * 3, [0.0] * 3)


class TestWelch:
    def test_identical_samples_p_one(self):
        res = welch_t_test([0.5, 0.5, 0.5], [0.5, 0.5, 0.5])
        assert res.p_value == 1.0

    def test_separated_samples_tiny_p(self):
        rng = np.random.default_rng(5)
        a = rng.normal(0.0, 1.0, 200)
        b = rng.normal(1.0, 1.0, 200)
        res = welch_t_test(a, b)
        assert res.p_value < 1e-9

    def test_symmetry(self):
        rng = np.random.default_rng(6)
        a, b = rng.random(20), rng.random(20)
        assert welch_t_test(a, b).p_value == pytest.approx(
            welch_t_test(b, a).p_value)
        assert welch_t_test(a, b).statistic == pytest.approx(
            -welch_t_test(b, a).statistic)

    def test_matches_reference_implementation(self):
        from scipy import stats
        rng = np.random.default_rng(7)
        a = rng.normal(0.3, 0.5, 40)
        b = rng.normal(0.5, 1.5, 25)
        res = welch_t_test(a, b)
        ref = stats.ttest_ind(a, b, equal_var=False)
        assert res.statistic == pytest.approx(ref.statistic)
        assert res.p_value == pytest.approx(ref.pvalue)

    def test_one_sided(self):
        rng = np.random.default_rng(8)
        a = rng.normal(1.0, 1.0, 100)
        b = rng.normal(0.0, 1.0, 100)
        two = welch_t_test(a, b)
        greater = welch_t_test(a, b, alternative="greater")
        less = welch_t_test(a, b, alternative="less")
        assert greater.p_value == pytest.approx(two.p_value / 2)
        assert less.p_value == pytest.approx(1 - two.p_value / 2)

    def test_zero_variance_distinct_means(self):
        res = welch_t_test([0.2, 0.2], [0.8, 0.8])
        assert res.p_value == 0.0

    def test_sample_size_validation(self):
        with pytest.raises(ValueError):
            welch_t_test([1.0], [1.0, 2.0])

    def test_unknown_alternative(self):
        with pytest.raises(ValueError):
            welch_t_test([1.0, 2.0], [1.0, 2.0], alternative="sideways")


def synthetic_trace(positions, visits_per_step, n=4):
    """Single-agent trace with scripted positions and visit lists."""
    trace = RunTrace(n=n, num_agents=1, steps=len(positions),
                     flocking_radius=2)
    start = positions[0]
    trace.init_records = [StepRecord(0, 0, start, 0.5, 1, None, None, None,
                                     "both", (start,))]
    for step, (pos, visits) in enumerate(zip(positions, visits_per_step), 1):
        trace.records.append(StepRecord(step, 0, pos, 0.5, len(visits),
                                        0, (0, 0), None, None, tuple(visits)))
    return trace


class TestPriorVisits:
    def test_single_agent_no_opponent_visits(self):
        env = EnvironmentConfig(n=8, k=3, num_agents=1, steps=10, seed=1)
        _, traces = evaluate_strategy(manual_strategy("exploit", "private"),
                                      env, 3, detail=True, collect_traces=True)
        report = count_prior_visits(traces, radius=2)
        assert report.mean_opponent == 0.0
        assert report.mean_total == report.mean_self

    def test_stationary_agent_accumulates_self_visits(self):
        # agent sits at point 0 and visits it every step: at step t there
        # are t prior visits (init + t-1 step visits) within radius 0
        positions = [0] * 5
        visits = [[0]] * 5
        trace = synthetic_trace(positions, visits)
        report = count_prior_visits([trace], radius=0)
        assert report.per_run[0][0] == pytest.approx(sum(range(1, 6)) / 5)
        assert report.mean_opponent == 0.0

    def test_radius_zero_counts_exact_revisits_only(self):
        positions = [1, 2]
        visits = [[3], [4]]    # never revisits its own position
        trace = synthetic_trace(positions, visits)
        report = count_prior_visits([trace], radius=0)
        assert report.mean_self == 0.0

    def test_totals_split(self):
        env = EnvironmentConfig(n=8, k=3, num_agents=4, steps=8, seed=2,
                                opponent_strategies=(
                                    manual_strategy("exploit", "public"),))
        _, traces = evaluate_strategy(manual_strategy("exploit", "public"),
                                      env, 2, detail=True, collect_traces=True)
        report = count_prior_visits(traces, radius=2)
        assert report.mean_total == pytest.approx(
            report.mean_self + report.mean_opponent)
        assert report.mean_self >= 0 and report.mean_opponent >= 0

    def test_empty_traces_rejected(self):
        with pytest.raises(ValueError):
            count_prior_visits([], radius=2)


class TestOccupancy:
    def _trace_with_counts(self, s1, s2):
        trace = RunTrace(n=4, num_agents=1, steps=sum(s1), flocking_radius=2)
        trace.occupancies = [StateOccupancy(list(s1), list(s2))]
        return trace

    def test_always_one_state(self):
        trace = self._trace_with_counts([0, 0, 0, 10], [4, 6])
        s1_pct, s2_pct = aggregate_occupancy([trace])
        assert np.array_equal(s1_pct, [0, 0, 0, 100.0])
        assert s2_pct == pytest.approx([40.0, 60.0])

    def test_exact_fractions_across_traces(self):
        traces = [self._trace_with_counts([1, 1, 0, 0], [1, 0]),
                  self._trace_with_counts([2, 0, 0, 0], [0, 1])]
        s1_pct, s2_pct = aggregate_occupancy(traces)
        assert s1_pct == pytest.approx([75.0, 25.0, 0.0, 0.0])
        assert s2_pct == pytest.approx([50.0, 50.0])

    def test_sums_to_hundred(self):
        env = EnvironmentConfig(n=8, k=3, num_agents=2, steps=10, seed=3,
                                opponent_strategies=(
                                    manual_strategy("explore", "public"),))
        trace = run_simulation(env, manual_strategy("exploit", "either"))
        s1_pct, s2_pct = aggregate_occupancy([trace])
        assert s1_pct.sum() == pytest.approx(100.0, abs=1e-9)
        assert s2_pct.sum() in (pytest.approx(100.0, abs=1e-9), 0.0)

    def test_empty_rejected(self):
        trace = RunTrace(n=4, num_agents=1, steps=0, flocking_radius=2)
        trace.occupancies = [StateOccupancy()]
        with pytest.raises(ValueError):
            aggregate_occupancy([trace])
