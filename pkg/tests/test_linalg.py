import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tsfs.errors import ConnectivityError, InvalidInputError
from tsfs.linalg import (as_matrix, double_center, heat_kernel, knn_graph,
                         pairwise_sq_distances, shortest_paths, sym_eig)


def _random_sym(rng, n):
    A = rng.standard_normal((n, n))
    return (A + A.T) / 2


def _charpoly_eigenvalues(A):
    """Faddeev-LeVerrier characteristic polynomial, then polynomial roots."""
    n = A.shape[0]
    coeffs = [1.0]
    M = np.zeros_like(A)
    c = 1.0
    for k in range(1, n + 1):
        M = A @ M + c * np.eye(n)
        c = -np.trace(A @ M) / k
        coeffs.append(c)
    return np.sort(np.real(np.roots(coeffs)))


class TestAsMatrix:
    def test_rejects_nan(self):
        with pytest.raises(InvalidInputError):
            as_matrix([[1.0, np.nan]])

    def test_rejects_empty(self):
        with pytest.raises(InvalidInputError):
            as_matrix(np.zeros((0, 3)))


class TestPairwise:
    def test_one_dimensional_pair(self):
        np.testing.assert_array_equal(pairwise_sq_distances([[0.0], [3.0]]), [[0, 9], [9, 0]])

    def test_identical_points(self):
        np.testing.assert_array_equal(pairwise_sq_distances([[1.0, 1.0], [1.0, 1.0]]),
                                      np.zeros((2, 2)))

    def test_brute_force(self):
        X = np.random.default_rng(0).standard_normal((5, 3))
        D = pairwise_sq_distances(X)
        ref = np.array([[np.sum((a - b) ** 2) for b in X] for a in X])
        np.testing.assert_allclose(D, ref, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(1, 12), st.integers(1, 4)),
                  elements=st.floats(-1e3, 1e3)))
    def test_exactly_symmetric_nonnegative(self, X):
        D = pairwise_sq_distances(X)
        assert np.array_equal(D, D.T)
        assert np.all(np.diag(D) == 0)
        assert np.all(D >= 0)


class TestSymEig:
    def test_diagonal(self):
        w, V = sym_eig(np.diag([2.0, 1.0]), 2, "largest", method="jacobi")
        np.testing.assert_allclose(w, [2, 1])
        np.testing.assert_allclose(np.abs(V), np.eye(2), atol=1e-14)

    def test_swap_matrix(self):
        w, V = sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]]), 2, "largest", method="jacobi")
        np.testing.assert_allclose(w, [1, -1], atol=1e-14)
        s = 1 / np.sqrt(2)
        np.testing.assert_allclose(np.abs(V[:, 0]), [s, s], atol=1e-14)
        np.testing.assert_allclose(V[0, 1] * V[1, 1], -0.5, atol=1e-14)

    def test_random_6x6_against_charpoly(self):
        rng = np.random.default_rng(3)
        A = _random_sym(rng, 6)
        w, V = sym_eig(A, method="jacobi")
        for j in range(6):
            assert np.linalg.norm(A @ V[:, j] - w[j] * V[:, j]) <= 1e-8 * np.linalg.norm(A)
        np.testing.assert_allclose(np.sort(w), _charpoly_eigenvalues(A), atol=1e-6)

    def test_smallest_order(self):
        A = np.diag([3.0, -1.0, 2.0])
        w, _ = sym_eig(A, 2, "smallest", method="jacobi")
        np.testing.assert_allclose(w, [-1, 2])

    @pytest.mark.parametrize("n", [1, 2, 7, 20])
    def test_reconstruction_and_orthonormality(self, n):
        A = _random_sym(np.random.default_rng(n), n)
        w, V = sym_eig(A, method="jacobi")
        np.testing.assert_allclose(V.T @ V, np.eye(n), atol=1e-8)
        assert np.linalg.norm(V @ np.diag(w) @ V.T - A) <= 1e-7 * np.linalg.norm(A)

    def test_jacobi_agrees_with_lapack(self):
        A = _random_sym(np.random.default_rng(11), 30)
        wj, _ = sym_eig(A, method="jacobi")
        wl, _ = sym_eig(A, method="lapack")
        np.testing.assert_allclose(wj, wl, atol=1e-10)

    def test_rejects_asymmetric(self):
        with pytest.raises(InvalidInputError):
            sym_eig(np.array([[1.0, 2.0], [0.0, 1.0]]))


class TestKnnGraph:
    def test_collinear(self):
        g = knn_graph(np.array([[0.0], [1.0], [10.0]]), 1, symmetrize=False)
        np.testing.assert_array_equal(g.indices[:, 0], [1, 0, 1])

    def test_duplicates_keep_zero_edges_without_self(self):
        X = np.array([[0.0, 0.0], [0.0, 0.0], [5.0, 5.0]])
        g = knn_graph(X, 1, symmetrize=False)
        np.testing.assert_array_equal(g.indices[:, 0], [1, 0, 0])
        assert g.weights[0, 0] == 0.0
        assert not np.any(np.diag(g.edges))

    def test_brute_force_sets(self):
        X = np.random.default_rng(2).standard_normal((20, 4))
        g = knn_graph(X, 3, symmetrize=False)
        for i in range(20):
            d = [(np.sum((X[i] - X[j]) ** 2), j) for j in range(20) if j != i]
            ref = [j for _, j in sorted(d)[:3]]
            assert set(g.indices[i]) == set(ref)

    def test_tie_break_lower_index(self):
        X = np.array([[0.0], [-1.0], [1.0], [2.0]])
        g = knn_graph(X, 1, symmetrize=False)
        assert g.indices[0, 0] == 1

    def test_symmetrized_edge_if_either_lists(self):
        X = np.array([[0.0], [1.0], [10.0]])
        g = knn_graph(X, 1, symmetrize=True)
        assert g.edges[1, 2] and g.edges[2, 1]
        np.testing.assert_array_equal(g.edges, g.edges.T)

    def test_k_too_large(self):
        with pytest.raises(InvalidInputError):
            knn_graph(np.zeros((3, 2)), 3)


def _graph_from_edges(n, edges):
    D = np.full((n, n), np.inf)
    for i, j, w in edges:
        D[i, j] = D[j, i] = w
    return D


def _floyd_warshall(D):
    D = D.copy()
    np.fill_diagonal(D, 0.0)
    for k in range(D.shape[0]):
        D = np.minimum(D, D[:, [k]] + D[[k], :])
    return D


class TestShortestPaths:
    def test_chain(self):
        X = np.array([[0.0], [1.0], [2.0]])
        G = shortest_paths(knn_graph(X, 1))
        assert G[0, 2] == 2.0

    def test_triangle(self):
        X = np.array([[0.0, 0.0], [1.0, 0.0], [0.5, np.sqrt(3) / 2]])
        G = shortest_paths(knn_graph(X, 2))
        np.testing.assert_allclose(G[~np.eye(3, dtype=bool)], 1.0)

    def test_floyd_warshall(self):
        X = np.random.default_rng(4).standard_normal((15, 2))
        g = knn_graph(X, 4)
        assert g.n_components() == 1
        G = shortest_paths(g)
        np.testing.assert_allclose(G, _floyd_warshall(g.edge_lengths()), rtol=0, atol=1e-12)
        n = G.shape[0]
        for i, j, k in itertools.product(range(n), repeat=3):
            assert G[i, j] <= G[i, k] + G[k, j] + 1e-12

    def test_disconnected(self):
        X = np.array([[0.0], [0.1], [10.0], [10.1]])
        with pytest.raises(ConnectivityError, match="increase"):
            shortest_paths(knn_graph(X, 1))


class TestDoubleCenter:
    def test_zero(self):
        np.testing.assert_array_equal(double_center(np.zeros((3, 3))), np.zeros((3, 3)))

    def test_two_points(self):
        np.testing.assert_allclose(double_center(np.array([[0.0, 4.0], [4.0, 0.0]])),
                                   [[1, -1], [-1, 1]])

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(2, 10), st.integers(1, 3)),
                  elements=st.floats(-100, 100)))
    def test_row_sums_vanish(self, X):
        B = double_center(pairwise_sq_distances(X))
        scale = max(1.0, np.abs(B).max())
        assert np.all(np.abs(B.sum(axis=1)) <= 1e-10 * scale * X.shape[0])


class TestHeatKernel:
    def test_infinite_t_is_adjacency(self):
        X = np.random.default_rng(5).standard_normal((12, 3))
        g = knn_graph(X, 3)
        W, _ = heat_kernel(g, np.inf)
        np.testing.assert_allclose(W, g.edges.astype(float), atol=1e-6)

    def test_large_t_approaches_adjacency(self):
        X = np.random.default_rng(5).standard_normal((12, 3))
        g = knn_graph(X, 3)
        W, _ = heat_kernel(g, 1e9)
        np.testing.assert_allclose(W, g.edges.astype(float), atol=1e-6)

    def test_auto_scale_is_mean_squared_edge(self):
        X = np.random.default_rng(6).standard_normal((10, 2))
        g = knn_graph(X, 2)
        _, t = heat_kernel(g)
        L = g.edge_lengths()
        np.testing.assert_allclose(t, np.mean(L[g.edges] ** 2))
