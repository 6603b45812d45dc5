"""Metrics, batch oracles, and regret traces."""

import numpy as np
import pytest

from onlinemkl.data import StreamRecord, Task, gen_stationary_stream
from onlinemkl.evaluation import (
    OracleError,
    batch_exact_oracle,
    batch_rf_oracle,
    class_error,
    dynamic_regret_piecewise,
    error_curve,
    mse_curve,
    static_regret,
)
from onlinemkl.features import FeatureVariant, KernelFamily, KernelSpec, sample_spectral

SPEC = KernelSpec(KernelFamily.GAUSSIAN, 1.0, 3)


def records_from(X, y):
    return [StreamRecord(i + 1, np.asarray(xi, float), float(yi)) for i, (xi, yi) in enumerate(zip(X, y))]


class TestMseCurve:
    def test_perfect_predictions(self):
        np.testing.assert_array_equal(mse_curve([1.0, 2.0], [1.0, 2.0]), 0.0)

    def test_constant_error(self):
        np.testing.assert_allclose(mse_curve([1, 1, 1], [3, 3, 3]), 4.0)

    def test_hand_summed_values(self):
        np.testing.assert_allclose(mse_curve([0.0, 1.0], [1.0, 1.0]), [1.0, 0.5])

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            mse_curve([1.0], [1.0, 2.0])

    def test_final_value_permutation_invariant(self):
        rng = np.random.default_rng(0)
        preds, ys = rng.normal(size=50), rng.normal(size=50)
        perm = rng.permutation(50)
        assert mse_curve(preds, ys)[-1] == pytest.approx(
            mse_curve(preds[perm], ys[perm])[-1], rel=1e-12
        )


class TestClassError:
    def test_all_agree(self):
        assert class_error([0.5, -2.0], [1.0, -1.0]) == 0.0

    def test_all_disagree(self):
        assert class_error([0.5, -2.0], [-1.0, 1.0]) == 1.0

    def test_quarter_wrong(self):
        assert class_error([1, 1, 1, -1], [1, 1, 1, 1]) == 0.25

    def test_zero_prediction_counts_as_error(self):
        assert class_error([0.0], [1.0]) == 1.0

    def test_invalid_labels(self):
        with pytest.raises(ValueError):
            class_error([1.0], [0.5])

    def test_curve_is_running_average(self):
        np.testing.assert_allclose(error_curve([1, -1, 1], [1, 1, 1]), [0, 0.5, 1 / 3])


class TestBatchOracle:
    def make_maps(self, num_features=20, seeds=(0, 1)):
        return [sample_spectral(SPEC, num_features, FeatureVariant.RF, seed=s) for s in seeds]

    def test_planted_solution_recovery(self):
        rng = np.random.default_rng(1)
        fm = self.make_maps()[0]
        theta0 = rng.standard_normal(fm.output_dim)
        X = rng.standard_normal((200, 3))  # T = 200 > 2D = 40
        y = fm.transform_many(X) @ theta0
        result = batch_rf_oracle(records_from(X, y), [fm], lam=0.0)
        np.testing.assert_allclose(result.theta_stars[0], theta0, atol=1e-8)
        assert result.oracle_loss == pytest.approx(0.0, abs=1e-10)

    def test_huge_ridge_shrinks_solution_to_zero(self):
        rng = np.random.default_rng(2)
        fm = self.make_maps()[0]
        X = rng.standard_normal((50, 3))
        y = rng.normal(size=50)
        result = batch_rf_oracle(records_from(X, y), [fm], lam=1e9)
        assert np.linalg.norm(result.theta_stars[0]) < 1e-6

    def test_first_order_optimality(self):
        rng = np.random.default_rng(3)
        maps = self.make_maps()
        X = rng.standard_normal((120, 3))
        y = rng.normal(size=120)
        recs = records_from(X, y)
        lam = 0.01
        result = batch_rf_oracle(recs, maps, lam)
        for fm, theta in zip(maps, result.theta_stars):
            Z = fm.transform_many(X)
            grad = Z.T @ (Z @ theta - y) + lam * len(recs) * theta
            assert np.linalg.norm(grad) < 1e-8

    def test_random_probing_never_beats_oracle(self):
        rng = np.random.default_rng(4)
        fm = self.make_maps()[0]
        X = rng.standard_normal((100, 3))
        y = rng.normal(size=100)
        recs = records_from(X, y)
        lam = 0.01
        result = batch_rf_oracle(recs, [fm], lam)
        Z = fm.transform_many(X)
        for _ in range(100):
            cand = result.theta_stars[0] + rng.standard_normal(fm.output_dim) * rng.uniform(0, 1)
            loss = float(np.sum((Z @ cand - y) ** 2)) + lam * 100 * float(cand @ cand)
            assert loss >= result.oracle_loss - 1e-9

    def test_per_slot_losses_sum_to_total(self):
        rng = np.random.default_rng(5)
        maps = self.make_maps()
        X = rng.standard_normal((60, 3))
        y = rng.normal(size=60)
        result = batch_rf_oracle(records_from(X, y), maps, 0.01)
        assert result.per_slot_losses.sum() == pytest.approx(result.oracle_loss, rel=1e-12)

    def test_rank_deficient_unregularized_system_raises(self):
        rng = np.random.default_rng(6)
        fm = self.make_maps()[0]  # output_dim 40
        X = rng.standard_normal((10, 3))  # T = 10 << 40: singular normal matrix
        y = rng.normal(size=10)
        with pytest.raises(OracleError):
            batch_rf_oracle(records_from(X, y), [fm], lam=0.0)

    def test_dimension_cap_enforced(self):
        fm = sample_spectral(SPEC, 1500, FeatureVariant.RF, seed=9)
        with pytest.raises(OracleError, match="limited"):
            batch_rf_oracle(records_from(np.zeros((3, 3)), np.zeros(3)), [fm], 0.01)

    def test_exact_oracle_beats_rf_oracle_never_needed_but_runs(self):
        recs = gen_stationary_stream(SPEC, 3, 80, 0.05, seed=7)
        loss = batch_exact_oracle(recs, [SPEC], lam=0.01)
        assert np.isfinite(loss) and loss >= 0

    def test_exact_oracle_horizon_guard(self):
        recs = gen_stationary_stream(SPEC, 3, 30, 0.05, seed=8)
        with pytest.raises(OracleError):
            batch_exact_oracle(recs, [SPEC], 0.01, max_horizon=10)


class TestStaticRegret:
    def test_oracle_against_itself_is_zero(self):
        losses = np.abs(np.random.default_rng(9).normal(size=100)) + 0.1
        trace = static_regret(losses, losses)
        np.testing.assert_allclose(trace.regret, 0.0, atol=1e-12)
        assert trace.final_regret == 0.0

    def test_dominating_losses_give_positive_regret(self):
        oracle = np.full(64, 0.5)
        algo = np.full(64, 0.75)
        trace = static_regret(algo, oracle)
        assert np.all(trace.regret > 0)
        assert trace.final_regret == pytest.approx(16.0)

    def test_scalar_comparator_spread_uniformly(self):
        trace = static_regret(np.ones(10), 5.0)
        np.testing.assert_allclose(np.diff(trace.cum_oracle), 0.5)
        assert trace.final_regret == pytest.approx(5.0)

    def test_checkpoints_at_powers_of_two(self):
        trace = static_regret(np.ones(20), np.zeros(20))
        assert [t for t, _ in trace.checkpoints] == [1, 2, 4, 8, 16]
        for t, v in trace.checkpoints:
            assert v == pytest.approx(t / np.sqrt(t))

    def test_rows_schema(self):
        trace = static_regret(np.ones(4), np.zeros(4))
        rows = list(trace.rows())
        assert rows[0] == (1, 1.0, 0.0, 1.0, 1.0)
        assert len(rows) == 4


class TestDynamicRegret:
    def make_stream_and_maps(self, T=80):
        recs = gen_stationary_stream(SPEC, 3, T, 0.05, seed=10)
        maps = [sample_spectral(SPEC, 10, FeatureVariant.RF, seed=s) for s in (0, 1)]
        return recs, maps

    def test_single_segment_equals_static(self):
        recs, maps = self.make_stream_and_maps()
        losses = np.abs(np.random.default_rng(11).normal(size=80)) + 0.2
        oracle = batch_rf_oracle(recs, maps, 0.01)
        static = static_regret(losses, oracle.per_slot_losses).final_regret
        dynamic = dynamic_regret_piecewise(losses, recs, [], maps, 0.01)
        assert dynamic == pytest.approx(static, rel=1e-12)

    def test_two_identical_segments_double_the_comparator(self):
        recs, maps = self.make_stream_and_maps(T=40)
        mirrored = recs + [
            StreamRecord(r.t + 40, r.x, r.y, r.task) for r in recs
        ]
        losses = np.ones(80)
        half_oracle = batch_rf_oracle(recs, maps, 0.01).oracle_loss
        regret = dynamic_regret_piecewise(losses, mirrored, [41], maps, 0.01)
        assert regret == pytest.approx(80.0 - 2 * half_oracle, rel=1e-10)

    def test_rejects_unknown_switch_points(self):
        recs, maps = self.make_stream_and_maps(T=20)
        with pytest.raises(ValueError):
            dynamic_regret_piecewise(np.ones(20), recs, [25], maps, 0.01)
