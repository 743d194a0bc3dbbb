import numpy as np
import pytest
from numpy.testing import assert_allclose

from crossblock import (
    DataBlock,
    correlation_bundle,
    effective_rank,
    inverse_sqrt_sym,
    zscore_columns,
)
from crossblock.blocks import CorrelationBundle
from crossblock.errors import ConstantColumn, NotPositiveDefinite, ObservationMismatch

from oracles import brute_pearson, inverse_sqrt_reference, random_spd


def block(*columns, labels=None):
    values = np.column_stack(columns)
    labels = labels or tuple(f"c{i + 1}" for i in range(values.shape[1]))
    return DataBlock(values, labels)


class TestDataBlock:
    def test_basic_shape(self):
        b = block([1.0, 2.0, 3.0], [4.0, 5.0, 7.0])
        assert b.n == 3 and b.k == 2

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            block([1.0, np.nan, 3.0])

    def test_rejects_single_row(self):
        with pytest.raises(ValueError):
            DataBlock(np.ones((1, 2)), ("a", "b"))

    def test_rejects_label_mismatch(self):
        with pytest.raises(ValueError):
            DataBlock(np.ones((3, 2)), ("a",))

    def test_values_read_only(self):
        b = block([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            b.values[0, 0] = 9.0


class TestZscore:
    def test_unit_sd_column_unchanged(self):
        z = zscore_columns(block([1.0, 2.0, 3.0]))
        assert_allclose(z.values[:, 0], [-1.0, 0.0, 1.0], atol=1e-14)

    def test_constant_column_rejected(self):
        with pytest.raises(ConstantColumn) as err:
            zscore_columns(block([10.0, 10.0, 10.0], labels=("flat",)))
        assert err.value.label == "flat"

    def test_mean_four_sd_two(self):
        # hand computation: mean 4, sample sd 2
        z = zscore_columns(block([2.0, 4.0, 6.0]))
        assert_allclose(z.values[:, 0], [-1.0, 0.0, 1.0], atol=1e-14)

    def test_moments_and_original_untouched(self):
        rng = np.random.default_rng(3)
        b = block(rng.normal(5, 3, 40), rng.uniform(0, 9, 40))
        before = b.values.copy()
        z = zscore_columns(b)
        assert np.abs(z.values.mean(0)).max() < 1e-10
        assert np.abs(z.values.std(0, ddof=1) - 1).max() < 1e-10
        assert_allclose(b.values, before)


class TestCorrelationBundle:
    def test_self_correlation(self):
        x = block([1.0, 2.0, 4.0])
        b = correlation_bundle(x, x)
        assert_allclose(b.rxy, [[1.0]], atol=1e-12)

    def test_perfect_anticorrelation(self):
        b = correlation_bundle(block([1.0, 2.0, 3.0]), block([3.0, 2.0, 1.0]))
        assert_allclose(b.rxy, [[-1.0]], atol=1e-12)

    def test_hand_pearson_three_points(self):
        x = block([1.0, 2.0, 3.0], [1.0, 3.0, 2.0])
        b = correlation_bundle(x, block([2.0, 2.5, 9.0]))
        assert_allclose(b.rxx[0, 1], 0.5, atol=1e-12)
        assert_allclose(
            b.rxx[0, 1], brute_pearson([1, 2, 3], [1, 3, 2]), atol=1e-12
        )

    def test_observation_mismatch(self):
        with pytest.raises(ObservationMismatch):
            correlation_bundle(block([1.0, 2.0, 3.0]), block([1.0, 2.0]))

    def test_ryx_exact_transpose(self):
        rng = np.random.default_rng(1)
        b = correlation_bundle(
            block(*rng.normal(size=(3, 20))), block(*rng.normal(size=(2, 20)))
        )
        assert np.array_equal(b.ryx, b.rxy.T)

    def test_bundle_invariants(self):
        rng = np.random.default_rng(7)
        b = correlation_bundle(
            block(*rng.normal(size=(4, 60))), block(*rng.normal(size=(3, 60))),
            with_omega=True,
        )
        for m in (b.rxx, b.ryy):
            assert np.abs(m - m.T).max() < 1e-10
            assert np.abs(np.diag(m) - 1).max() < 1e-10
        assert np.abs(b.rxy).max() <= 1 + 1e-10
        assert b.omega is not None

    def test_omega_equals_rxy_for_identity_within_block(self):
        from crossblock import component_scores, fit_pca

        rng = np.random.default_rng(5)
        x = block(*rng.normal(size=(4, 200)))
        y = block(*rng.normal(size=(3, 200)))
        sx = component_scores(x, fit_pca(x), 4)
        sy = component_scores(y, fit_pca(y), 3)
        b = correlation_bundle(sx, sy, with_omega=True)
        assert np.abs(b.omega - b.rxy).max() < 1e-10

    def test_correlation_equals_covariance_of_zscored(self):
        rng = np.random.default_rng(11)
        x = block(*rng.normal(size=(5, 80)))
        y = block(*rng.uniform(size=(2, 80)))
        b = correlation_bundle(x, y)
        xz = zscore_columns(x).values
        yz = zscore_columns(y).values
        assert np.abs(b.rxy - xz.T @ yz / 79).max() < 1e-12

    def test_affine_invariance(self):
        rng = np.random.default_rng(13)
        base = rng.normal(size=(50, 3))
        y = block(*rng.normal(size=(2, 50)))
        ref = correlation_bundle(block(*base.T), y)
        for seed in range(5):
            r = np.random.default_rng(seed)
            scale = r.uniform(0.1, 10, 3)
            shift = r.normal(0, 100, 3)
            moved = correlation_bundle(block(*(base * scale + shift).T), y)
            assert np.abs(moved.rxy - ref.rxy).max() < 1e-10

    def test_validation_rejects_bad_ryx(self):
        eye = np.eye(2)
        rxy = np.array([[0.5, 0.0], [0.0, 0.1]])
        with pytest.raises(ValueError, match="transpose"):
            CorrelationBundle(rxx=eye, ryy=eye, rxy=rxy, ryx=rxy + 1e-15)


class TestInverseSqrt:
    def test_identity(self):
        assert_allclose(inverse_sqrt_sym(np.eye(3)), np.eye(3), atol=1e-12)

    def test_diagonal(self):
        out = inverse_sqrt_sym(np.diag([4.0, 9.0]))
        assert_allclose(out, np.diag([0.5, 1.0 / 3.0]), atol=1e-12)

    def test_against_reference_oracle(self):
        m = np.array([[1.0, 0.6], [0.6, 1.0]])
        w = np.linalg.eigvalsh(m)
        assert_allclose(sorted(w), [0.4, 1.6], atol=1e-12)
        a = inverse_sqrt_sym(m)
        assert_allclose(a @ m @ a, np.eye(2), atol=1e-10)
        assert_allclose(a, inverse_sqrt_reference(m), atol=1e-10)

    def test_symmetry_of_result(self):
        rng = np.random.default_rng(2)
        m = random_spd(rng, 5, 100.0)
        a = inverse_sqrt_sym(m)
        assert np.array_equal(a, a.T)

    def test_rejects_singular(self):
        v = np.array([1.0, 2.0, 2.0])
        with pytest.raises(NotPositiveDefinite):
            inverse_sqrt_sym(np.outer(v, v))

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError, match="symmetric"):
            inverse_sqrt_sym(np.array([[1.0, 0.2], [0.0, 1.0]]))

    def test_reconstruction_property(self):
        # applying the result twice and inverting recovers the input
        rng = np.random.default_rng(17)
        for i in range(30):
            m = random_spd(rng, int(rng.integers(2, 8)), float(rng.uniform(1, 1e6)))
            a = inverse_sqrt_sym(m)
            assert np.abs(np.linalg.inv(a @ a) - m).max() < 1e-8 * max(
                1.0, np.abs(m).max()
            )


class TestEffectiveRank:
    def test_identity(self):
        assert effective_rank(np.eye(5)) == 5

    def test_rank_one_outer_product(self):
        v = np.array([1.0, -2.0, 0.5])
        assert effective_rank(np.outer(v, v)) == 1

    def test_centering_bound(self):
        rng = np.random.default_rng(23)
        x = DataBlock(rng.normal(size=(20, 50)), tuple(f"v{i}" for i in range(50)))
        b = zscore_columns(x)
        r = b.values.T @ b.values / 19
        assert effective_rank(r) <= 19

    def test_zero_matrix(self):
        assert effective_rank(np.zeros((4, 4))) == 0
