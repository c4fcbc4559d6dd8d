import numpy as np
import pytest
from scipy import sparse

from evosc.core import (AffinityMatrix, Labeling, RankDeficientWarning,
                        RepresentationMatrix, Snapshot, ZeroColumnError,
                        build_affinity, normalize_columns, pca_project,
                        residual)


def random_representation(rng, n, density=0.1):
    mat = sparse.random_array((n, n), density=density, rng=rng).tocsc()
    mat.setdiag(0.0)
    mat.eliminate_zeros()
    return RepresentationMatrix(mat)


class TestNormalizeColumns:
    def test_three_four_five(self):
        out = normalize_columns(np.array([[3.0], [4.0]]))
        np.testing.assert_allclose(out, [[0.6], [0.8]])

    def test_identity_unchanged(self):
        eye = np.eye(4)
        np.testing.assert_array_equal(normalize_columns(eye), eye)

    def test_random_norms_one(self):
        rng = np.random.default_rng(0)
        X = normalize_columns(rng.standard_normal((10, 500)))
        np.testing.assert_allclose(np.linalg.norm(X, axis=0), 1.0, atol=1e-10)

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        X = rng.standard_normal((6, 40)) * 3.7
        once = normalize_columns(X)
        twice = normalize_columns(once)
        np.testing.assert_allclose(twice, once, atol=1e-12)

    def test_zero_column_raises(self):
        X = np.ones((3, 3))
        X[:, 1] = 0.0
        with pytest.raises(ZeroColumnError) as err:
            normalize_columns(X)
        assert err.value.index == 1


class TestBuildAffinity:
    def test_zero_maps_to_zero(self):
        A = build_affinity(RepresentationMatrix.zeros(5))
        assert not A.weights.any()

    def test_single_negative_entry(self):
        mat = sparse.csc_array((np.array([-0.5]), (np.array([0],), np.array([1]))),
                               shape=(3, 3))
        A = build_affinity(RepresentationMatrix(mat))
        expected = np.zeros((3, 3))
        expected[0, 1] = expected[1, 0] = 0.5
        np.testing.assert_array_equal(A.weights, expected)

    def test_symmetric_nonnegative_zero_diag(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            C = random_representation(rng, 30)
            A = build_affinity(C)
            assert np.array_equal(A.weights, A.weights.T)
            assert (A.weights >= 0).all()
            assert not A.weights.diagonal().any()


class TestResidual:
    def test_zero_coefficients(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((4, 7))
        assert residual(X, RepresentationMatrix.zeros(7)) == pytest.approx(
            np.linalg.norm(X, "fro") ** 2)

    def test_exact_duplicate_column(self):
        X = np.zeros((3, 3))
        X[:, 0] = X[:, 1] = [1.0, 0.0, 0.0]
        X[:, 2] = [0.0, 1.0, 0.0]
        mat = sparse.csc_array((np.array([1.0]), (np.array([1]), np.array([0]))),
                               shape=(3, 3))
        diff = X - X @ mat
        assert np.linalg.norm(diff[:, 0]) == 0.0

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((5, 20))
        C = random_representation(rng, 20, density=0.2)
        dense = C.toarray()
        brute = sum((X[i, j] - sum(X[i, l] * dense[l, j] for l in range(20))) ** 2
                    for i in range(5) for j in range(20))
        assert residual(X, C) == pytest.approx(brute, rel=1e-10)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(5)
        X = rng.standard_normal((4, 12))
        C = random_representation(rng, 12, density=0.3)
        perm = rng.permutation(12)
        Xp = X[:, perm]
        Cp = RepresentationMatrix(sparse.csc_array(C.toarray()[np.ix_(perm, perm)]))
        assert residual(Xp, Cp) == pytest.approx(residual(X, C), rel=1e-12)


class TestPcaProject:
    def test_exact_low_rank_reconstruction(self):
        rng = np.random.default_rng(6)
        X = rng.standard_normal((8, 3)) @ rng.standard_normal((3, 40))
        proj = pca_project(X, 3)
        U, _, _ = np.linalg.svd(X, full_matrices=False)
        recon = U[:, :3] @ (U[:, :3].T @ X)
        assert np.linalg.norm(X - recon) < 1e-8
        assert proj.shape == (3, 40)

    def test_full_dimension_preserves_norm(self):
        rng = np.random.default_rng(7)
        X = rng.standard_normal((6, 30))
        proj = pca_project(X, 6)
        assert np.linalg.norm(proj) == pytest.approx(np.linalg.norm(X), abs=1e-8)

    def test_rank3_gram_preserved(self):
        rng = np.random.default_rng(8)
        X = rng.standard_normal((10, 3) ) @ rng.standard_normal((3, 25))
        proj = pca_project(X, 3)
        np.testing.assert_allclose(proj.T @ proj, X.T @ X, atol=1e-8)

    def test_rank_deficient_warns_and_pads(self):
        rng = np.random.default_rng(9)
        X = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 20))
        with pytest.warns(RankDeficientWarning):
            proj = pca_project(X, 4)
        assert proj.shape == (4, 20)
        assert not proj[2:, :].any()

    def test_sign_convention_deterministic(self):
        rng = np.random.default_rng(10)
        X = rng.standard_normal((5, 15))
        a = pca_project(X, 3)
        b = pca_project(X.copy(), 3)
        np.testing.assert_array_equal(a, b)

    def test_dim_too_large(self):
        with pytest.raises(ValueError):
            pca_project(np.eye(3), 4)


class TestContainers:
    def test_snapshot_validation(self):
        with pytest.raises(ValueError):
            Snapshot(data=np.ones((2, 3)), point_ids=[1, 2])
        with pytest.raises(ValueError):
            Snapshot(data=np.ones((2, 3)), point_ids=[1, 1, 2])
        with pytest.raises(ValueError):
            Snapshot(data=np.ones((2, 3)), point_ids=[1, 2, 3], truth=[1])

    def test_representation_rejects_nonzero_diagonal(self):
        with pytest.raises(ValueError):
            RepresentationMatrix(sparse.csc_array(np.eye(3)))

    def test_representation_rejects_rectangular(self):
        with pytest.raises(ValueError):
            RepresentationMatrix(sparse.csc_array(np.zeros((2, 3))))

    def test_affinity_rejects_asymmetry(self):
        W = np.zeros((3, 3))
        W[0, 1] = 1.0
        with pytest.raises(ValueError):
            AffinityMatrix(W)

    def test_affinity_rejects_negative(self):
        W = np.zeros((2, 2))
        W[0, 1] = W[1, 0] = -1.0
        with pytest.raises(ValueError):
            AffinityMatrix(W)

    def test_labeling_range_check(self):
        Labeling(labels=np.array([1, 2, 2]), n=2)
        with pytest.raises(ValueError):
            Labeling(labels=np.array([0, 1]), n=2)
        with pytest.raises(ValueError):
            Labeling(labels=np.array([1, 3]), n=2)
