import numpy as np
import pytest
from scipy import sparse

from evosc.core import RepresentationMatrix, normalize_columns
from evosc.learners import (AlphaTooSmallError, LearnerConfig,
                            NotConvergedWarning, aols_column, bp_objective,
                            compute_xtilde, default_bp_weight, learn_aols,
                            learn_bp_admm, learn_omp, learn_representation,
                            make_gram_solver, omp_column, soft_threshold)


# ---------------------------------------------------------------------------
# reference implementations used as oracles (kept deliberately naive)
# ---------------------------------------------------------------------------

def omp_oracle_selections(X, target, j, k, residual_stop=1e-7):
    """Greedy correlation rule with explicit pseudo-inverse projections.

    Honors the same degenerate-column contract as the implementation: a
    column whose residual is numerically zero stops early.
    """
    N = X.shape[1]
    support = []
    r = target.copy()
    r0 = np.linalg.norm(target)
    for _ in range(k):
        best, best_score = None, -1.0
        for i in range(N):
            if i == j or i in support:
                continue
            score = float(np.dot(r, X[:, i]) ** 2)
            if score > best_score + 0.0:
                best, best_score = i, score
        if best is None or best_score <= 0.0:
            break
        support.append(best)
        A = X[:, support]
        r = target - A @ (np.linalg.pinv(A) @ target)
        if np.linalg.norm(r) <= residual_stop * r0:
            break
    return support


def ols_oracle_step(X, r, support, j):
    """One selection by the projection-normalized correlation rule."""
    N = X.shape[1]
    if support:
        A = X[:, support]
        P = np.eye(X.shape[0]) - A @ np.linalg.pinv(A)
    else:
        P = np.eye(X.shape[0])
    best, best_score = None, -1.0
    for i in range(N):
        if i == j or i in support:
            continue
        denom = float(np.linalg.norm(P @ X[:, i]) ** 2)
        if denom <= 1e-12:
            continue
        score = float(np.dot(r, X[:, i]) ** 2) / denom
        if score > best_score:
            best, best_score = i, score
    return best, best_score


def unit_columns(rng, D, N):
    return normalize_columns(rng.standard_normal((D, N)))


def independent_subspace_data(rng, D, d, n_sub, per):
    bases, cols, labels = [], [], []
    for s in range(n_sub):
        G = rng.standard_normal((D, D))
        U = np.linalg.svd(G)[0][:, :d]
        bases.append(U)
        pts = U @ rng.standard_normal((d, per))
        cols.append(pts / np.linalg.norm(pts, axis=0))
        labels.extend([s] * per)
    return np.hstack(cols), np.array(labels)


# ---------------------------------------------------------------------------
# compute_xtilde
# ---------------------------------------------------------------------------

class TestComputeXtilde:
    def test_alpha_one_is_identity(self):
        rng = np.random.default_rng(0)
        X = unit_columns(rng, 5, 10)
        mat = sparse.random_array((10, 10), density=0.2, rng=rng).tocsc()
        mat.setdiag(0.0)
        out = compute_xtilde(X, RepresentationMatrix(mat), 1.0)
        np.testing.assert_array_equal(out, X)

    def test_zero_history_scales(self):
        rng = np.random.default_rng(1)
        X = unit_columns(rng, 4, 8)
        out = compute_xtilde(X, RepresentationMatrix.zeros(8), 0.5)
        np.testing.assert_allclose(out, 2.0 * X)

    def test_matches_bruteforce(self):
        rng = np.random.default_rng(2)
        X = unit_columns(rng, 6, 15)
        mat = sparse.random_array((15, 15), density=0.3, rng=rng).tocsc()
        mat.setdiag(0.0)
        C = RepresentationMatrix(mat)
        alpha = 0.7
        out = compute_xtilde(X, C, alpha)
        brute = (X - (1 - alpha) * (X @ C.toarray())) / alpha
        np.testing.assert_allclose(out, brute, atol=1e-12)

    def test_alpha_floor(self):
        X = np.eye(3)
        with pytest.raises(AlphaTooSmallError):
            compute_xtilde(X, RepresentationMatrix.zeros(3), 1e-4)
        with pytest.raises(ValueError):
            compute_xtilde(X, RepresentationMatrix.zeros(3), 1.5)


# ---------------------------------------------------------------------------
# greedy pursuit
# ---------------------------------------------------------------------------

class TestOmp:
    def test_exact_match_single_atom(self):
        rng = np.random.default_rng(3)
        X = unit_columns(rng, 6, 8)
        target = X[:, 3].copy()
        state, coeffs = omp_column(X, target, j=0, k=1)
        assert state.support == [3]
        assert coeffs[0] == pytest.approx(1.0, abs=1e-10)

    def test_selections_match_oracle(self):
        rng = np.random.default_rng(4)
        mismatches = 0
        for _ in range(200):
            D = int(rng.integers(3, 9))
            N = int(rng.integers(4, 13))
            k = int(rng.integers(1, min(4, N - 1) + 1))
            X = unit_columns(rng, D, N)
            target = rng.standard_normal(D)
            j = int(rng.integers(N))
            state, _ = omp_column(X, target, j, k)
            if state.support != omp_oracle_selections(X, target, j, k):
                mismatches += 1
        assert mismatches == 0

    def test_subspace_preserving_on_independent_subspaces(self):
        rng = np.random.default_rng(5)
        X, labels = independent_subspace_data(rng, D=12, d=3, n_sub=3, per=25)
        U = learn_omp(X, X, k=3)
        dense = U.toarray()
        for j in range(X.shape[1]):
            picked = np.flatnonzero(dense[:, j])
            assert (labels[picked] == labels[j]).all()

    def test_residual_monotone_in_support_prefix(self):
        rng = np.random.default_rng(6)
        X = unit_columns(rng, 8, 20)
        target = rng.standard_normal(8)
        state, _ = omp_column(X, target, j=0, k=5)
        prev = np.linalg.norm(target)
        for ell in range(1, len(state.support) + 1):
            A = X[:, state.support[:ell]]
            r = target - A @ np.linalg.lstsq(A, target, rcond=None)[0]
            now = np.linalg.norm(r)
            assert now <= prev + 1e-12
            prev = now

    def test_budget_respected(self):
        rng = np.random.default_rng(7)
        X = unit_columns(rng, 5, 30)
        U = learn_omp(X, X, k=4)
        counts = np.diff(U.coeffs.indptr)
        assert (counts <= 4).all()

    def test_zero_diagonal(self):
        rng = np.random.default_rng(8)
        X = unit_columns(rng, 5, 15)
        U = learn_omp(X, X, k=3)
        assert not U.coeffs.diagonal().any()

    def test_rejects_unnormalized(self):
        rng = np.random.default_rng(9)
        with pytest.raises(ValueError):
            learn_omp(rng.standard_normal((4, 10)) * 3, np.eye(4, 10), k=2)

    def test_degenerate_column_stops_early(self):
        # target exactly representable by one atom: stops after 1 selection
        X = np.eye(4)[:, :3]
        X = np.hstack([X, X[:, :1]])  # duplicate column 0 at index 3
        state, coeffs = omp_column(X, X[:, 0], j=0, k=3)
        assert state.support == [3]
        assert coeffs[0] == pytest.approx(1.0)


class TestAols:
    def test_L1_on_orthonormal_matches_omp(self):
        rng = np.random.default_rng(10)
        Q = np.linalg.qr(rng.standard_normal((8, 8)))[0]
        target = rng.standard_normal(8)
        s_omp, _ = omp_column(Q, target, j=0, k=3)
        s_aols, _ = aols_column(Q, target, j=0, k=3, L=1)
        assert s_omp.support == s_aols.support

    def test_selections_match_criterion_oracle(self):
        rng = np.random.default_rng(11)
        mismatches = 0
        for _ in range(200):
            D = int(rng.integers(3, 9))
            N = int(rng.integers(4, 13))
            k = int(rng.integers(1, min(4, N - 1) + 1))
            X = unit_columns(rng, D, N)
            target = rng.standard_normal(D)
            j = int(rng.integers(N))
            state, _ = aols_column(X, target, j, k, L=1)
            support, r = [], target.copy()
            for _ in range(k):
                best, score = ols_oracle_step(X, r, support, j)
                if best is None or score <= 0:
                    break
                support.append(best)
                A = X[:, support]
                r = target - A @ (np.linalg.pinv(A) @ target)
                if np.linalg.norm(r) <= 1e-7 * np.linalg.norm(target):
                    break
            if state.support != support:
                mismatches += 1
        assert mismatches == 0

    def test_lookahead_budget_and_residual(self):
        rng = np.random.default_rng(12)
        X = unit_columns(rng, 6, 25)
        target = rng.standard_normal(6)
        s1, c1 = aols_column(X, target, j=0, k=2, L=1)
        s2, c2 = aols_column(X, target, j=0, k=2, L=2)
        assert len(s2.support) <= 4

        def ls_residual(support):
            if not support:
                return float(np.linalg.norm(target))
            A = X[:, support]
            return float(np.linalg.norm(target - A @ np.linalg.lstsq(A, target, rcond=None)[0]))

        assert ls_residual(s2.support) <= ls_residual(s1.support) + 1e-10

    def test_matrix_budget(self):
        rng = np.random.default_rng(13)
        X = unit_columns(rng, 6, 30)
        U = learn_aols(X, X, k=2, L=3)
        counts = np.diff(U.coeffs.indptr)
        assert (counts <= 6).all()
        assert not U.coeffs.diagonal().any()


# ---------------------------------------------------------------------------
# soft threshold and ADMM
# ---------------------------------------------------------------------------

class TestSoftThreshold:
    @pytest.mark.parametrize("x,eta,expected", [
        (2.0, 0.5, 1.5),
        (-0.3, 0.5, 0.0),
        (-2.0, 0.5, -1.5),
        (0.0, 0.0, 0.0),
    ])
    def test_known_values(self, x, eta, expected):
        assert soft_threshold(x, eta) == pytest.approx(expected)

    def test_dense_grid_matches_closed_form(self):
        xs = np.linspace(-3, 3, 121)
        etas = np.linspace(0, 2, 41)
        for eta in etas:
            got = soft_threshold(xs, eta)
            want = np.maximum(np.abs(xs) - eta, 0.0) * np.sign(xs)
            np.testing.assert_allclose(got, want, atol=1e-15)

    def test_negative_eta_rejected(self):
        with pytest.raises(ValueError):
            soft_threshold(1.0, -0.1)


class TestGramSolver:
    def test_matches_dense_solve(self):
        rng = np.random.default_rng(14)
        X = unit_columns(rng, 6, 40)
        lam, rho = 35.0, 35.0
        solve = make_gram_solver(X, lam, rho)
        rhs = rng.standard_normal((40, 3))
        dense = np.linalg.solve(lam * X.T @ X + rho * np.eye(40), rhs)
        np.testing.assert_allclose(solve(rhs), dense, atol=1e-10)


class TestBpAdmm:
    def test_tiny_lambda_gives_zero(self):
        rng = np.random.default_rng(15)
        X = unit_columns(rng, 5, 12)
        cfg = LearnerConfig(method="bp", lam=1e-8)
        U = learn_bp_admm(X, X, cfg)
        assert np.abs(U.coeffs).sum() < 1e-4

    def test_two_identical_columns_scalar_lasso(self):
        # min |u| + (lam/2)(1-u)^2 has the closed-form solution 1 - 1/lam
        rng = np.random.default_rng(16)
        x = rng.standard_normal(6)
        x /= np.linalg.norm(x)
        X = np.stack([x, x], axis=1)
        lam = 1000.0
        cfg = LearnerConfig(method="bp", lam=lam, rho=lam, admm_max_iters=2000,
                            admm_tol=1e-9)
        U = learn_bp_admm(X, X, cfg).toarray()
        assert U[1, 0] == pytest.approx(1 - 1 / lam, abs=0.01)
        assert U[0, 1] == pytest.approx(1 - 1 / lam, abs=0.01)
        assert U[1, 0] == pytest.approx(1.0, abs=0.01)

    def test_objective_close_to_high_accuracy_reference(self):
        rng = np.random.default_rng(17)
        X = unit_columns(rng, 10, 40)
        Xt = X + 0.3 * rng.standard_normal(X.shape)
        cfg = LearnerConfig(method="bp", admm_max_iters=1000)
        U = learn_bp_admm(X, Xt, cfg)
        lam = default_bp_weight(X, Xt)
        ref_cfg = LearnerConfig(method="bp", admm_tol=1e-10,
                                admm_max_iters=cfg.admm_max_iters * 100)
        U_ref = learn_bp_admm(X, Xt, ref_cfg)
        obj = bp_objective(X, Xt, U, lam)
        obj_ref = bp_objective(X, Xt, U_ref, lam)
        assert obj <= obj_ref * (1 + 1e-3) + 1e-12

    def test_as_printed_variant_runs(self):
        rng = np.random.default_rng(18)
        X = unit_columns(rng, 6, 20)
        cfg = LearnerConfig(method="bp", admm_update="as_printed")
        U = learn_bp_admm(X, X, cfg)
        assert U.shape == (20, 20)
        assert not U.coeffs.diagonal().any()

    def test_not_converged_warns(self):
        rng = np.random.default_rng(19)
        X = unit_columns(rng, 5, 15)
        cfg = LearnerConfig(method="bp", admm_max_iters=2, admm_tol=1e-14)
        with pytest.warns(NotConvergedWarning):
            learn_bp_admm(X, X, cfg)

    def test_sparsification_floor(self):
        rng = np.random.default_rng(20)
        X = unit_columns(rng, 6, 25)
        U = learn_bp_admm(X, X, LearnerConfig(method="bp"))
        vals = np.abs(U.coeffs.data)
        assert (vals >= 1e-6).all()


class TestDispatch:
    def test_methods_route(self):
        rng = np.random.default_rng(21)
        X = unit_columns(rng, 6, 12)
        for method in ("omp", "aols", "bp"):
            cfg = LearnerConfig(method=method, k=2, L=2)
            U = learn_representation(X, X, cfg)
            assert U.shape == (12, 12)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            LearnerConfig(method="nope")
        with pytest.raises(ValueError):
            LearnerConfig(k=0)
        with pytest.raises(ValueError):
            LearnerConfig(L=0)
        with pytest.raises(ValueError):
            LearnerConfig(lam=-1.0)
        with pytest.raises(ValueError):
            LearnerConfig(admm_update="typo")
