"""Kernel evaluation and random feature map tests."""

import numpy as np
import pytest

from onlinemkl.features import (
    FeatureVariant,
    KernelFamily,
    KernelSpec,
    derive_seed,
    exact_kernel,
    kernel_cross,
    sample_spectral,
)

GAUSS1_D5 = KernelSpec(KernelFamily.GAUSSIAN, 1.0, 5)


class TestKernelSpec:
    def test_rejects_bad_bandwidth(self):
        with pytest.raises(ValueError):
            KernelSpec(KernelFamily.GAUSSIAN, 0.0, 3)
        with pytest.raises(ValueError):
            KernelSpec(KernelFamily.GAUSSIAN, -1.0, 3)

    def test_rejects_bad_dim(self):
        with pytest.raises(ValueError):
            KernelSpec(KernelFamily.GAUSSIAN, 1.0, 0)

    def test_accepts_family_strings(self):
        spec = KernelSpec("Laplacian", 2.0, 4)
        assert spec.family is KernelFamily.LAPLACIAN


class TestExactKernel:
    def test_standardized_at_zero_lag(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(5)
        for family in KernelFamily:
            spec = KernelSpec(family, 1.7, 5)
            assert exact_kernel(spec, x, x) == pytest.approx(1.0, abs=1e-15)

    def test_gaussian_scalar_value(self):
        # exp(-1/2) at unit separation, unit bandwidth
        spec = KernelSpec(KernelFamily.GAUSSIAN, 1.0, 1)
        got = exact_kernel(spec, np.array([0.0]), np.array([1.0]))
        assert got == pytest.approx(np.exp(-0.5), abs=1e-15)

    def test_laplacian_and_cauchy_closed_forms(self):
        x = np.array([0.5, -1.0])
        x2 = np.array([-0.25, 0.5])
        delta = x - x2
        lap = KernelSpec(KernelFamily.LAPLACIAN, 2.0, 2)
        assert exact_kernel(lap, x, x2) == pytest.approx(
            np.exp(-np.sum(np.abs(delta)) / 2.0), abs=1e-15
        )
        cau = KernelSpec(KernelFamily.CAUCHY, 2.0, 2)
        assert exact_kernel(cau, x, x2) == pytest.approx(
            np.prod(1.0 / (1.0 + (delta / 2.0) ** 2)), abs=1e-15
        )

    def test_values_in_unit_interval(self):
        rng = np.random.default_rng(3)
        for family in KernelFamily:
            spec = KernelSpec(family, 0.5, 4)
            for _ in range(50):
                v = exact_kernel(spec, rng.standard_normal(4), rng.standard_normal(4))
                assert 0.0 <= v <= 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            exact_kernel(GAUSS1_D5, np.zeros(5), np.zeros(4))

    def test_kernel_cross_matches_scalar(self):
        rng = np.random.default_rng(4)
        centers = rng.standard_normal((6, 5))
        x = rng.standard_normal(5)
        batched = kernel_cross(GAUSS1_D5, centers, x)
        singles = [exact_kernel(GAUSS1_D5, c, x) for c in centers]
        np.testing.assert_allclose(batched, singles, rtol=1e-14)


class TestSampleSpectral:
    def test_rejects_nonpositive_count(self):
        with pytest.raises(ValueError):
            sample_spectral(GAUSS1_D5, 0)

    def test_gaussian_rows_have_inverse_bandwidth_covariance(self):
        # rows ~ Normal(0, I / sigma^2): empirical covariance near identity
        fm = sample_spectral(GAUSS1_D5, 5000, FeatureVariant.RF, seed=11)
        cov = np.cov(fm.spectral_matrix.T)
        np.testing.assert_allclose(cov, np.eye(5), atol=0.1)

    def test_gaussian_variance_scales_with_bandwidth(self):
        spec = KernelSpec(KernelFamily.GAUSSIAN, 4.0, 3)
        fm = sample_spectral(spec, 6000, FeatureVariant.RF, seed=12)
        var = np.var(fm.spectral_matrix, axis=0)
        np.testing.assert_allclose(var, 0.25, atol=0.05)

    def test_orf_rows_orthogonal_per_block(self):
        spec = KernelSpec(KernelFamily.GAUSSIAN, 1.0, 4)
        fm = sample_spectral(spec, 8, FeatureVariant.ORF, seed=5)
        V = fm.spectral_matrix * np.sqrt(spec.bandwidth)
        for b in range(2):
            block = V[4 * b : 4 * (b + 1)]
            rows = block / np.linalg.norm(block, axis=1, keepdims=True)
            gram = rows @ rows.T
            assert np.max(np.abs(gram - np.eye(4))) < 1e-9

    def test_orf_requires_multiple_of_dim(self):
        with pytest.raises(ValueError, match="multiple"):
            sample_spectral(GAUSS1_D5, 7, FeatureVariant.ORF, seed=0)

    def test_orf_requires_gaussian(self):
        spec = KernelSpec(KernelFamily.LAPLACIAN, 1.0, 4)
        with pytest.raises(ValueError, match="Gaussian"):
            sample_spectral(spec, 4, FeatureVariant.ORF, seed=0)

    def test_same_seed_reproduces_bit_identical_matrix(self):
        a = sample_spectral(GAUSS1_D5, 64, FeatureVariant.RF, seed=99)
        b = sample_spectral(GAUSS1_D5, 64, FeatureVariant.RF, seed=99)
        assert np.array_equal(a.spectral_matrix, b.spectral_matrix)

    def test_matrix_is_read_only(self):
        fm = sample_spectral(GAUSS1_D5, 8, FeatureVariant.RF, seed=1)
        with pytest.raises(ValueError):
            fm.spectral_matrix[0, 0] = 0.0

    def test_heavy_tailed_families_sample(self):
        # Laplacian kernel uses Cauchy rows, Cauchy kernel uses Laplace rows;
        # check the Laplace second moment (2 / bandwidth^2 per coordinate)
        spec = KernelSpec(KernelFamily.CAUCHY, 2.0, 2)
        fm = sample_spectral(spec, 20000, FeatureVariant.RF, seed=8)
        np.testing.assert_allclose(
            np.var(fm.spectral_matrix, axis=0), 2.0 / 4.0, rtol=0.1
        )


class TestFeatureVectors:
    def test_zero_input_splits_into_blocks(self):
        fm = sample_spectral(GAUSS1_D5, 16, FeatureVariant.RF, seed=2)
        z = fm.transform(np.zeros(5))
        np.testing.assert_array_equal(z[:16], 0.0)
        np.testing.assert_allclose(z[16:], 1.0 / 4.0, rtol=1e-15)

    def test_unit_norm(self):
        rng = np.random.default_rng(7)
        fm = sample_spectral(GAUSS1_D5, 32, FeatureVariant.RF, seed=3)
        for _ in range(100):
            z = fm.transform(rng.standard_normal(5))
            assert abs(np.linalg.norm(z) - 1.0) < 1e-12

    def test_transform_many_matches_single(self):
        rng = np.random.default_rng(8)
        fm = sample_spectral(GAUSS1_D5, 32, FeatureVariant.RF, seed=3)
        X = rng.standard_normal((7, 5))
        stacked = fm.transform_many(X)
        for i in range(7):
            # batched BLAS path may reorder sums relative to the vector path
            np.testing.assert_allclose(stacked[i], fm.transform(X[i]), atol=1e-12)

    def test_dimension_mismatch(self):
        fm = sample_spectral(GAUSS1_D5, 8, FeatureVariant.RF, seed=3)
        with pytest.raises(ValueError):
            fm.transform(np.zeros(4))

    def test_same_seed_same_features(self):
        a = sample_spectral(GAUSS1_D5, 16, FeatureVariant.RF, seed=42)
        b = sample_spectral(GAUSS1_D5, 16, FeatureVariant.RF, seed=42)
        x = np.linspace(-1, 1, 5)
        assert np.array_equal(a.transform(x), b.transform(x))

    def test_mean_estimate_over_maps_near_exact(self):
        # averaging kernel estimates over 200 independent small maps
        rng = np.random.default_rng(9)
        x, x2 = rng.standard_normal(5), rng.standard_normal(5)
        estimates = [
            sample_spectral(GAUSS1_D5, 10, FeatureVariant.RF, seed=s).kernel_estimate(x, x2)
            for s in range(200)
        ]
        assert abs(np.mean(estimates) - exact_kernel(GAUSS1_D5, x, x2)) < 0.05


class TestKernelEstimate:
    def test_self_similarity_is_one(self):
        rng = np.random.default_rng(10)
        fm = sample_spectral(GAUSS1_D5, 32, FeatureVariant.RF, seed=6)
        for _ in range(20):
            x = rng.standard_normal(5)
            assert abs(fm.kernel_estimate(x, x) - 1.0) < 1e-12

    def test_symmetry_bit_exact(self):
        rng = np.random.default_rng(11)
        fm = sample_spectral(GAUSS1_D5, 32, FeatureVariant.RF, seed=6)
        for _ in range(20):
            x, x2 = rng.standard_normal(5), rng.standard_normal(5)
            assert fm.kernel_estimate(x, x2) == fm.kernel_estimate(x2, x)

    def test_bounded_by_one_in_magnitude(self):
        rng = np.random.default_rng(12)
        fm = sample_spectral(GAUSS1_D5, 16, FeatureVariant.RF, seed=6)
        for _ in range(100):
            v = fm.kernel_estimate(rng.standard_normal(5), rng.standard_normal(5))
            assert -1.0 <= v <= 1.0 + 1e-12

    def test_pointwise_error_bounded_at_moderate_width(self):
        spec = KernelSpec(KernelFamily.GAUSSIAN, 1.0, 2)
        fm = sample_spectral(spec, 400, FeatureVariant.RF, seed=13)
        rng = np.random.default_rng(14)
        worst = 0.0
        for _ in range(100):
            x, x2 = rng.standard_normal(2), rng.standard_normal(2)
            worst = max(worst, abs(fm.kernel_estimate(x, x2) - exact_kernel(spec, x, x2)))
        assert worst < 0.2

    def test_unbiased_across_seeds(self):
        # mean over 500 seeds within 3 standard errors of the exact value
        spec = KernelSpec(KernelFamily.GAUSSIAN, 1.0, 3)
        rng = np.random.default_rng(15)
        x, x2 = rng.standard_normal(3), rng.standard_normal(3)
        vals = np.array(
            [
                sample_spectral(spec, 8, FeatureVariant.RF, seed=s).kernel_estimate(x, x2)
                for s in range(500)
            ]
        )
        tol = 3.0 * np.std(vals, ddof=1) / np.sqrt(500)
        assert abs(np.mean(vals) - exact_kernel(spec, x, x2)) < tol

    def test_orthogonal_variant_does_not_increase_variance(self):
        spec = KernelSpec(KernelFamily.GAUSSIAN, 1.0, 8)
        rng = np.random.default_rng(16)
        x = rng.standard_normal(8) * 0.4
        x2 = rng.standard_normal(8) * 0.4
        rf = [
            sample_spectral(spec, 8, FeatureVariant.RF, seed=s).kernel_estimate(x, x2)
            for s in range(500)
        ]
        orf = [
            sample_spectral(spec, 8, FeatureVariant.ORF, seed=s).kernel_estimate(x, x2)
            for s in range(500)
        ]
        assert np.var(orf, ddof=1) <= 1.05 * np.var(rf, ddof=1)


def test_derive_seed_is_stable_and_distinct():
    assert derive_seed(7, 0) == derive_seed(7, 0)
    assert derive_seed(7, 0) != derive_seed(7, 1)
    assert derive_seed(8, 0) != derive_seed(7, 0)


def test_spectral_second_moment_matches_gaussian_theory():
    # E||v||^2 = d / bandwidth for the Gaussian family
    fm = sample_spectral(GAUSS1_D5, 4000, FeatureVariant.RF, seed=17)
    assert fm.spectral_second_moment() == pytest.approx(5.0, rel=0.1)
