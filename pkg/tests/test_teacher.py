import numpy as np
import pytest

from tsfs.datasets import Dataset
from tsfs.errors import ConnectivityError, InvalidInputError
from tsfs.linalg import knn_graph, pairwise_sq_distances
from tsfs.teacher import (TeacherSpec, TsneParams, conditional_probabilities, fit_isomap, fit_lle,
                          fit_mds, fit_pca, fit_spectral, fit_supervised_mlp, fit_teacher,
                          fit_tsne, joint_probabilities, lle_weights)


def _align_signs(A, B):
    """Flip columns of A to best match B."""
    return A * np.sign(np.sum(A * B, axis=0))


def _blobs(rng, n_per=20, sep=10.0, d=3):
    X = np.vstack([rng.normal(0, 1, (n_per, d)), rng.normal(sep, 1, (n_per, d))])
    return X, np.repeat([0, 1], n_per)


class TestPca:
    def test_line(self):
        t = np.linspace(-2, 3, 11)
        X = np.c_[t, 2 * t + 1]
        emb = fit_pca(X, 1)
        w = emb.info["explained_variance"]
        assert w[0] > 0
        r = np.corrcoef(emb.Y[:, 0], t)[0, 1]
        np.testing.assert_allclose(abs(r), 1.0, atol=1e-12)

    def test_diagonal_covariance_axis(self):
        rng = np.random.default_rng(0)
        Z = rng.standard_normal((400, 2))
        Z = (Z - Z.mean(0)) @ np.linalg.inv(np.linalg.cholesky(np.cov(Z.T))).T
        X = Z * [2.0, 1.0]
        Y = fit_pca(X, 1).Y[:, 0]
        np.testing.assert_allclose(np.abs(Y), np.abs(X[:, 0]), atol=1e-8)

    def test_covariance_oracle(self):
        X = np.random.default_rng(1).standard_normal((30, 6))
        Xc = X - X.mean(0)
        w, V = np.linalg.eigh(np.cov(X.T))
        ref = Xc @ V[:, ::-1][:, :2]
        Y = fit_pca(X, 2).Y
        np.testing.assert_allclose(_align_signs(Y, ref), ref, atol=1e-8)

    def test_dimension_checked(self):
        with pytest.raises(InvalidInputError):
            fit_pca(np.zeros((5, 2)), 2)


class TestMds:
    def test_right_triangle(self):
        P = np.array([[0.0, 0.0], [3.0, 0.0], [0.0, 4.0]])
        D = np.sqrt(pairwise_sq_distances(P))
        Y = fit_mds(D, 2, precomputed=True).Y
        np.testing.assert_allclose(np.sqrt(pairwise_sq_distances(Y)), D, atol=1e-8)

    def test_identical_points(self):
        with np.testing.suppress_warnings() as sup:
            sup.filter(RuntimeWarning)
            Y = fit_mds(np.ones((5, 3)), 2).Y
        np.testing.assert_allclose(Y, 0, atol=1e-12)

    def test_equals_pca(self):
        X = np.random.default_rng(2).standard_normal((25, 5))
        A = fit_mds(X, 2).Y
        B = fit_pca(X, 2).Y
        np.testing.assert_allclose(_align_signs(A, B), B, atol=1e-6)

    def test_non_euclidean_warns(self):
        D = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]], dtype=float)
        with pytest.warns(RuntimeWarning, match="negative"):
            fit_mds(D, 2, precomputed=True)


class TestIsomap:
    def test_arc_ordering(self):
        theta = np.linspace(0, np.pi / 2, 15)
        X = np.c_[np.cos(theta), np.sin(theta)]
        y = fit_isomap(X, 1, k_neighbors=2).Y[:, 0]
        order = np.argsort(y)
        assert np.array_equal(order, np.arange(15)) or np.array_equal(order, np.arange(15)[::-1])

    def test_line_matches_mds(self):
        t = np.linspace(0, 1, 12) + np.random.default_rng(3).uniform(-0.02, 0.02, 12)
        X = np.c_[t, -t, 0.5 * t]
        A = fit_isomap(X, 1, k_neighbors=3).Y
        B = fit_mds(X, 1).Y
        np.testing.assert_allclose(_align_signs(A, B), B, atol=1e-8)

    def test_disconnected(self):
        X = np.r_[np.zeros((4, 2)) + [0, 0], np.zeros((4, 2)) + [50, 50]]
        X = X + np.random.default_rng(0).normal(0, 0.1, X.shape)
        with pytest.raises(ConnectivityError):
            fit_isomap(X, 1, k_neighbors=2)


class TestLle:
    def test_midpoint_weights(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [10.0, 0.0]])
        idx, w = lle_weights(X, 2, reg=1e-3)
        assert set(idx[1]) == {0, 2}
        np.testing.assert_allclose(w[1], [0.5, 0.5])
        recon = w[1] @ X[idx[1]]
        np.testing.assert_allclose(recon, X[1], atol=1e-12)

    def test_weights_sum_to_one(self):
        X = np.random.default_rng(4).standard_normal((30, 5))
        _, w = lle_weights(X, 7)
        np.testing.assert_allclose(w.sum(axis=1), 1.0, atol=1e-14)

    def test_circle_null_vector(self):
        rng = np.random.default_rng(5)
        theta = np.linspace(0, 2 * np.pi, 40, endpoint=False)
        X = np.c_[np.cos(theta), np.sin(theta), 0.05 * rng.standard_normal(40)]
        emb = fit_lle(X, 2, k_neighbors=6)
        assert abs(emb.info["eigenvalues"][0]) < 1e-10
        idx, w = lle_weights(X, 6)
        W = np.zeros((40, 40))
        W[np.repeat(np.arange(40), 6), idx.ravel()] = w.ravel()
        M = (np.eye(40) - W).T @ (np.eye(40) - W)
        np.testing.assert_allclose(M @ np.ones(40), 0, atol=1e-10)
        assert np.all(np.isfinite(emb.Y)) and emb.Y.shape == (40, 2)


class TestSpectral:
    def test_laplacian_null_space(self):
        X = np.random.default_rng(6).standard_normal((30, 3))
        emb = fit_spectral(X, 2, k_neighbors=6)
        assert abs(emb.info["eigenvalues"][0]) < 1e-10

    def test_two_blobs(self):
        X, y = _blobs(np.random.default_rng(7), n_per=15, sep=8.0)
        Y = fit_spectral(X, 1, k_neighbors=15).Y[:, 0]
        assert len(set(np.sign(Y[y == 0]))) == 1
        assert len(set(np.sign(Y[y == 1]))) == 1
        assert np.sign(Y[0]) != np.sign(Y[-1])

    def test_infinite_heat_scale(self):
        X = np.random.default_rng(8).standard_normal((20, 3))
        emb = fit_spectral(X, 2, k_neighbors=5, heat_t=np.inf)
        assert emb.params["heat_t"] == np.inf
        assert np.all(np.isfinite(emb.Y))

    def test_disconnected(self):
        X, _ = _blobs(np.random.default_rng(7), n_per=10, sep=50.0)
        with pytest.raises(ConnectivityError):
            fit_spectral(X, 1, k_neighbors=3)


class TestTsne:
    def test_equidistant_points_uniform(self):
        D = np.ones((6, 6)) - np.eye(6)
        for perp in (5.0, 2.0):
            P, _, H = conditional_probabilities(D, perp)
            off = ~np.eye(6, dtype=bool)
            np.testing.assert_allclose(P[off], 0.2)
            np.testing.assert_allclose(H, np.log(5))

    def test_calibration(self):
        rng = np.random.default_rng(9)
        for _ in range(3):
            X = rng.standard_normal((100, 5))
            _, _, H = conditional_probabilities(pairwise_sq_distances(X), 20.0)
            np.testing.assert_allclose(H, np.log(20.0), atol=1e-4)

    def test_joint_affinities(self):
        X = np.random.default_rng(10).standard_normal((40, 4))
        P = joint_probabilities(conditional_probabilities(pairwise_sq_distances(X), 10.0)[0])
        np.testing.assert_array_equal(P, P.T)
        assert np.all(P >= 0) and np.all(np.diag(P) == 0)
        np.testing.assert_allclose(P.sum(), 1.0)

    def test_kl_drops_after_exaggeration(self):
        X, _ = _blobs(np.random.default_rng(11), n_per=30, sep=6.0, d=5)
        params = TsneParams(perplexity=10, iterations=500)
        emb = fit_tsne(X, 2, params, seed=0)
        kl = emb.info["kl"]
        assert len(kl) == 500
        assert kl[-1] < kl[params.exaggeration_iters - 1]

    def test_deterministic(self):
        X = np.random.default_rng(12).standard_normal((30, 4))
        p = TsneParams(perplexity=5, iterations=100)
        np.testing.assert_array_equal(fit_tsne(X, 2, p, 3).Y, fit_tsne(X, 2, p, 3).Y)

    def test_perplexity_bound(self):
        with pytest.raises(InvalidInputError):
            fit_tsne(np.random.default_rng(0).standard_normal((10, 3)), 2, TsneParams(perplexity=9))


class TestSupervised:
    def test_separable_blobs(self):
        X, y = _blobs(np.random.default_rng(13), n_per=40, sep=4.0, d=4)
        emb = fit_supervised_mlp(Dataset(X, y), l=2, epochs=100, seed=0)
        assert emb.info["train_accuracy"] >= 0.95
        A = np.c_[emb.Y, np.ones(len(y))]
        w, *_ = np.linalg.lstsq(A, 2.0 * y - 1.0, rcond=None)
        assert np.mean((A @ w > 0) == (y == 1)) >= 0.95

    def test_three_class_shape_and_determinism(self):
        rng = np.random.default_rng(14)
        X = np.vstack([rng.normal(c, 1, (20, 4)) for c in (0, 4, 8)])
        ds = Dataset(X, np.repeat([0, 1, 2], 20))
        a = fit_supervised_mlp(ds, l=2, epochs=20, seed=5)
        b = fit_supervised_mlp(ds, l=2, epochs=20, seed=5)
        assert a.Y.shape == (60, 2)
        np.testing.assert_array_equal(a.Y, b.Y)

    def test_needs_labels(self):
        with pytest.raises(InvalidInputError):
            fit_supervised_mlp(Dataset(np.zeros((4, 3))), l=2)


class TestFitTeacher:
    @pytest.mark.parametrize("method,params", [
        ("pca", {}), ("mds", {}), ("isomap", {"k_neighbors": 8}), ("lle", {"k_neighbors": 8}),
        ("spectral", {"k_neighbors": 8}), ("tsne", {"perplexity": 8, "iterations": 150}),
        ("supervised-mlp", {"epochs": 20}),
    ])
    def test_every_method_finite_and_deterministic(self, method, params):
        rng = np.random.default_rng(15)
        X = rng.standard_normal((50, 6))
        ds = Dataset(X, (X[:, 0] > 0).astype(np.int64))
        spec = TeacherSpec(method, 2, 1, params)
        a, b = fit_teacher(ds, spec), fit_teacher(ds, spec)
        assert a.Y.shape == (50, 2) and np.all(np.isfinite(a.Y))
        np.testing.assert_array_equal(a.Y, b.Y)
        assert a.method == spec.method

    def test_unknown_method(self):
        with pytest.raises(InvalidInputError):
            TeacherSpec("umap")

    def test_knn_graph_used_by_isomap_is_connected(self):
        X = np.random.default_rng(16).standard_normal((40, 3))
        assert knn_graph(X, 8).n_components() == 1
