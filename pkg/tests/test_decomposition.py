import numpy as np
import pytest
from numpy.testing import assert_allclose

from crossblock import (
    DataBlock,
    align_reflections,
    canonical_coefficients,
    correlation_bundle,
    cosine_matrix,
    fit_cca,
    fit_pls,
    scale_vectors,
)
from crossblock.blocks import CorrelationBundle
from crossblock.decomposition import PLS, CrossBlockModel
from crossblock.errors import MethodMismatch, MissingOmega, ShapeMismatch

from oracles import brute_pearson, grid_max_canonical_correlation, random_invertible


def bundle_from(rxy, rxx=None, ryy=None, omega=None):
    p, q = np.asarray(rxy).shape
    rxx = np.eye(p) if rxx is None else rxx
    ryy = np.eye(q) if ryy is None else ryy
    rxy = np.asarray(rxy, dtype=float)
    return CorrelationBundle(rxx=rxx, ryy=ryy, rxy=rxy, ryx=rxy.T.copy(), omega=omega)


def gaussian_blocks(seed, n, p, q):
    rng = np.random.default_rng(seed)
    x = DataBlock(rng.normal(size=(n, p)), tuple(f"x{i}" for i in range(p)))
    y = DataBlock(rng.normal(size=(n, q)), tuple(f"y{i}" for i in range(q)))
    return x, y


class TestFitPls:
    def test_scalar(self):
        m = fit_pls(bundle_from([[0.5]]))
        assert_allclose(m.s, [0.5])
        assert_allclose(np.abs(m.u), [[1.0]])
        assert_allclose(np.abs(m.v), [[1.0]])

    def test_zero_matrix(self):
        m = fit_pls(bundle_from(np.zeros((3, 2))))
        assert_allclose(m.s, 0.0, atol=1e-15)

    def test_diagonal_by_inspection(self):
        m = fit_pls(bundle_from([[0.3, 0.0], [0.0, 0.1]]))
        assert_allclose(m.s, [0.3, 0.1], atol=1e-15)
        assert_allclose(np.abs(m.u), np.eye(2), atol=1e-12)
        assert_allclose(np.abs(m.v), np.eye(2), atol=1e-12)

    def test_frobenius_identity(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            x, y = gaussian_blocks(rng.integers(1 << 30), 40, 5, 3)
            b = correlation_bundle(x, y)
            m = fit_pls(b)
            assert abs(np.sum(m.s**2) - np.sum(b.rxy**2)) < 1e-10

    def test_orientation_deterministic(self):
        rng = np.random.default_rng(9)
        x, y = gaussian_blocks(rng.integers(1 << 30), 60, 4, 3)
        m = fit_pls(correlation_bundle(x, y))
        lead = np.argmax(np.abs(m.u), axis=0)
        assert np.all(m.u[lead, np.arange(m.r)] > 0)

    def test_reconstruction(self):
        x, y = gaussian_blocks(42, 50, 5, 4)
        b = correlation_bundle(x, y)
        m = fit_pls(b)
        assert np.abs(m.u @ np.diag(m.s) @ m.v.T - b.rxy).max() < 1e-8


class TestFitCca:
    def test_single_pair_is_pearson(self):
        rng = np.random.default_rng(8)
        xv = rng.normal(size=60)
        yv = 0.4 * xv + rng.normal(size=60)
        x = DataBlock(xv[:, None], ("x",))
        y = DataBlock(yv[:, None], ("y",))
        m = fit_cca(correlation_bundle(x, y, with_omega=True))
        assert_allclose(m.s[0], abs(brute_pearson(xv, yv)), atol=1e-12)

    def test_missing_omega(self):
        x, y = gaussian_blocks(3, 30, 3, 2)
        with pytest.raises(MissingOmega):
            fit_cca(correlation_bundle(x, y))

    def test_identity_within_block_matches_pls(self):
        from crossblock import component_scores, fit_pca

        x, y = gaussian_blocks(10, 150, 4, 3)
        sx = component_scores(x, fit_pca(x), 4)
        sy = component_scores(y, fit_pca(y), 3)
        b = correlation_bundle(sx, sy, with_omega=True)
        assert np.abs(fit_cca(b).s - fit_pls(b).s).max() < 1e-10

    def test_grid_search_oracle(self):
        rng = np.random.default_rng(21)
        for _ in range(8):
            x, y = gaussian_blocks(rng.integers(1 << 30), 120, 2, 2)
            m = fit_cca(correlation_bundle(x, y, with_omega=True))
            oracle = grid_max_canonical_correlation(x.values, y.values)
            assert abs(m.s[0] - oracle) < 2e-3

    def test_invariance_under_invertible_transforms(self):
        rng = np.random.default_rng(33)
        x, y = gaussian_blocks(6, 200, 4, 3)
        s_ref = fit_cca(correlation_bundle(x, y, with_omega=True)).s
        for _ in range(5):
            tx = random_invertible(rng, 4, float(rng.uniform(2, 1e4)))
            ty = random_invertible(rng, 3, float(rng.uniform(2, 1e4)))
            xt = DataBlock(x.values @ tx, x.labels)
            yt = DataBlock(y.values @ ty, y.labels)
            s = fit_cca(correlation_bundle(xt, yt, with_omega=True)).s
            assert np.abs(s - s_ref).max() < 1e-8

    def test_pls_not_invariant_under_mixing(self):
        rng = np.random.default_rng(44)
        x, y = gaussian_blocks(5, 200, 4, 3)
        s_ref = fit_pls(correlation_bundle(x, y)).s
        tx = random_invertible(rng, 4, 50.0)
        xt = DataBlock(x.values @ tx, x.labels)
        s = fit_pls(correlation_bundle(xt, y)).s
        assert np.abs(s - s_ref).max() > 1e-4

    def test_unit_bound(self):
        rng = np.random.default_rng(55)
        xv = rng.normal(size=(40, 3))
        y = DataBlock(xv @ rng.normal(size=(3, 3)), ("a", "b", "c"))
        m = fit_cca(correlation_bundle(DataBlock(xv, ("p", "q", "r")), y, with_omega=True))
        assert np.all(m.s <= 1.0 + 1e-10)


class TestCanonicalCoefficients:
    def test_identity_within_block(self):
        x, y = gaussian_blocks(12, 400, 3, 2)
        from crossblock import component_scores, fit_pca

        sx = component_scores(x, fit_pca(x), 3)
        sy = component_scores(y, fit_pca(y), 2)
        b = correlation_bundle(sx, sy, with_omega=True)
        model = fit_cca(b)
        coef = canonical_coefficients(b, model)
        assert np.abs(coef.weights_x - model.u).max() < 1e-8
        assert np.abs(coef.structure_x - model.u).max() < 1e-8

    def test_single_variable_structure_is_unit(self):
        rng = np.random.default_rng(2)
        xv = rng.normal(size=80)
        yv = 0.5 * xv + rng.normal(size=80)
        b = correlation_bundle(
            DataBlock(xv[:, None], ("x",)), DataBlock(yv[:, None], ("y",)),
            with_omega=True,
        )
        coef = canonical_coefficients(b, fit_cca(b))
        assert_allclose(abs(coef.structure_x[0, 0]), 1.0, atol=1e-10)

    def test_method_mismatch(self):
        x, y = gaussian_blocks(3, 40, 3, 2)
        b = correlation_bundle(x, y, with_omega=True)
        with pytest.raises(MethodMismatch):
            canonical_coefficients(b, fit_pls(b))

    def test_structure_tracks_pls_under_high_within_block_correlation(self):
        # correlated X indicators with alternating valence; structure
        # coefficients should resemble PLS weights more than the adjusted
        # canonical weights do
        rng = np.random.default_rng(14)
        n = 3000
        factor = rng.normal(size=n)
        signs = np.array([1, -1, 1, -1, 1, -1], dtype=float)
        x_vals = signs * (0.8 * factor[:, None]) + 0.7 * rng.normal(size=(n, 6))
        y_base = 0.6 * factor[:, None] + 0.9 * rng.normal(size=(n, 1))
        y_vals = np.column_stack([
            y_base[:, 0],
            0.7 * y_base[:, 0] + 0.7 * rng.normal(size=n),
            rng.normal(size=n),
        ])
        x = DataBlock(x_vals, tuple(f"x{i}" for i in range(6)))
        y = DataBlock(y_vals, ("y1", "y2", "y3"))
        b = correlation_bundle(x, y, with_omega=True)
        assert np.abs(b.rxx - np.eye(6)).max() > 0.4
        cca_model = fit_cca(b)
        pls_model = fit_pls(b)
        coef = canonical_coefficients(b, cca_model)

        def cos(a, c):
            return abs(a @ c) / (np.linalg.norm(a) * np.linalg.norm(c))

        pls_u1 = pls_model.u[:, 0]
        assert cos(coef.structure_x[:, 0], pls_u1) > cos(coef.weights_x[:, 0], pls_u1)

    def test_structure_bound(self):
        x, y = gaussian_blocks(31, 100, 5, 3)
        b = correlation_bundle(x, y, with_omega=True)
        coef = canonical_coefficients(b, fit_cca(b))
        assert np.abs(coef.structure_x).max() <= 1 + 1e-8
        assert np.abs(coef.structure_y).max() <= 1 + 1e-8


class TestScaleAndAlign:
    def test_scale_identity_singular_values(self):
        u = np.eye(2)
        m = CrossBlockModel(method=PLS, u=u, s=np.array([1.0, 1.0]), v=u.copy())
        us, vs = scale_vectors(m)
        assert_allclose(us, u)
        assert_allclose(vs, u)

    def test_scale_zero(self):
        u = np.eye(2)
        m = CrossBlockModel(method=PLS, u=u, s=np.array([0.0, 0.0]), v=u.copy())
        us, vs = scale_vectors(m)
        assert_allclose(us, 0.0)

    def test_scale_arithmetic(self):
        u = np.array([[0.6], [0.8]])
        m = CrossBlockModel(method=PLS, u=u, s=np.array([0.5]), v=np.array([[1.0]]))
        us, _ = scale_vectors(m)
        assert_allclose(us, [[0.3], [0.4]], atol=1e-15)

    def test_align_no_flips(self):
        ref = np.linalg.qr(np.random.default_rng(0).normal(size=(5, 3)))[0]
        cand, paired, flips = align_reflections(ref, ref.copy(), np.eye(3))
        assert not flips.any()
        assert_allclose(cand, ref)

    def test_align_all_flipped(self):
        ref = np.linalg.qr(np.random.default_rng(1).normal(size=(5, 3)))[0]
        cand, paired, flips = align_reflections(ref, -ref, -np.eye(3))
        assert flips.all()
        assert_allclose(cand, ref)
        assert_allclose(paired, np.eye(3))

    def test_align_single_column(self):
        ref = np.linalg.qr(np.random.default_rng(2).normal(size=(5, 3)))[0]
        cand = ref.copy()
        cand[:, 1] *= -1
        paired = np.ones((2, 3))
        out, paired_out, flips = align_reflections(ref, cand, paired)
        assert list(flips) == [False, True, False]
        assert_allclose(out, ref)
        assert_allclose(paired_out[:, 1], -1.0)

    def test_align_idempotent(self):
        rng = np.random.default_rng(3)
        ref = np.linalg.qr(rng.normal(size=(6, 4)))[0]
        cand = np.linalg.qr(rng.normal(size=(6, 4)))[0]
        paired = rng.normal(size=(3, 4))
        once = align_reflections(ref, cand, paired)
        twice = align_reflections(ref, once[0], once[1])
        assert np.array_equal(once[0], twice[0])
        assert np.array_equal(once[1], twice[1])
        assert not twice[2].any()

    def test_align_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            align_reflections(np.eye(3), np.eye(4), np.eye(4))


class TestCosineMatrix:
    def test_self_is_identity(self):
        q = np.linalg.qr(np.random.default_rng(5).normal(size=(6, 3)))[0]
        assert_allclose(cosine_matrix(q, q), np.eye(3), atol=1e-12)

    def test_orthogonal_columns(self):
        assert_allclose(cosine_matrix(np.eye(4)[:, :2], np.eye(4)[:, 2:]), 0.0)

    def test_rotation_angle(self):
        t = np.deg2rad(30)
        rot = np.array([[np.cos(t), -np.sin(t)], [np.sin(t), np.cos(t)]])
        out = cosine_matrix(np.eye(2), rot)
        assert_allclose(np.diag(out), np.cos(t), atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            cosine_matrix(np.eye(3), np.eye(4))
