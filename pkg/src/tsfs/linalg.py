"""Dense numerical kernels shared by the teachers, baselines and metrics.

Matrices are plain ``float64`` numpy arrays; :func:`as_matrix` is the single
gate that enforces shape and finiteness on the way in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import csgraph

from .errors import ConnectivityError, ConvergenceError, InvalidInputError

__all__ = [
    "NeighborGraph",
    "as_matrix",
    "pairwise_sq_distances",
    "sym_eig",
    "knn_graph",
    "shortest_paths",
    "double_center",
    "heat_kernel",
]

# elements per temporary block in pairwise_sq_distances
_BLOCK_ELEMS = 4_000_000
# largest order handled by Jacobi under method="auto"
JACOBI_MAX_N = 400


def as_matrix(X, name="X"):
    """Return ``X`` as a finite 2-D float64 array or raise InvalidInputError."""
    A = np.asarray(X, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidInputError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise InvalidInputError(f"{name} must have at least one row and column, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise InvalidInputError(f"{name} contains NaN or Inf")
    return A


def pairwise_sq_distances(X):
    """Squared Euclidean distances between the rows of ``X``.

    Differences are formed explicitly (no Gram-matrix shortcut), only the
    upper triangle is kept and then mirrored, so the result is bit-exactly
    symmetric with a zero diagonal.
    """
    X = as_matrix(X)
    n, d = X.shape
    D = np.zeros((n, n))
    step = max(1, _BLOCK_ELEMS // max(1, n * d))
    for start in range(0, n, step):
        stop = min(n, start + step)
        diff = X[start:stop, None, :] - X[None, start:, :]
        D[start:stop, start:] = np.einsum("ijk,ijk->ij", diff, diff)
    D = np.triu(D, 1)
    return D + D.T


def _round_robin(m):
    """Pairings for a round-robin tournament over ``m`` (even) players.

    Every unordered pair meets exactly once over the ``m - 1`` rounds and the
    pairs inside a round are disjoint.
    """
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        half = m // 2
        p = np.array(players[:half])
        q = np.array(players[half:][::-1])
        rounds.append((np.minimum(p, q), np.maximum(p, q)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def _jacobi(A, tol, max_sweeps):
    n = A.shape[0]
    A = A.copy()
    V = np.eye(n)
    scale = np.linalg.norm(A)
    if n == 1 or scale == 0.0:
        return np.diag(A).copy(), V
    m = n + (n % 2)
    rounds = _round_robin(m)
    off = 0.0
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(np.diag(A)))
        if off <= tol * scale:
            return np.diag(A).copy(), V
        for p, q in rounds:
            # a padded odd-sized problem uses index n as a bye
            keep = q < n
            p, q = p[keep], q[keep]
            apq = A[p, q]
            active = np.abs(apq) > 1e-18 * scale
            if not np.any(active):
                continue
            p, q, apq = p[active], q[active], apq[active]
            theta = (A[q, q] - A[p, p]) / (2.0 * apq)
            big = np.abs(theta) > 1e100
            safe = np.where(big, 0.0, theta)
            t = np.where(big, 0.5 / np.where(big, theta, 1.0),
                         np.sign(safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0)))
            t[theta == 0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c

            Ap, Aq = A[:, p], A[:, q]
            A[:, p] = Ap * c - Aq * s
            A[:, q] = Ap * s + Aq * c
            Ap, Aq = A[p, :], A[q, :]
            A[p, :] = c[:, None] * Ap - s[:, None] * Aq
            A[q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[p, q] = 0.0
            A[q, p] = 0.0

            Vp, Vq = V[:, p], V[:, q]
            V[:, p] = Vp * c - Vq * s
            V[:, q] = Vp * s + Vq * c
    raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps",
                           residual=off / scale)


def sym_eig(A, k=None, which="largest", method="auto", tol=1e-14, max_sweeps=60):
    """Eigenpairs of a real symmetric matrix.

    Parameters
    ----------
    A : (n, n) array_like
        Symmetric to within ``1e-10`` relative tolerance.
    k : int, optional
        Number of eigenpairs to return (default all ``n``).
    which : {"largest", "smallest"}
        End of the spectrum to return; values come sorted from that end.
    method : {"auto", "jacobi", "lapack"}
        ``"jacobi"`` runs cyclic Jacobi rotations with a parallel
        (round-robin) ordering. ``"lapack"`` defers to ``numpy.linalg.eigh``.
        ``"auto"`` picks Jacobi up to ``JACOBI_MAX_N`` rows, LAPACK above.

    Returns
    -------
    w : (k,) ndarray
    V : (n, k) ndarray
        Unit-norm eigenvectors in columns.
    """
    A = as_matrix(A, "A")
    n = A.shape[0]
    if A.shape[1] != n:
        raise InvalidInputError(f"A must be square, got {A.shape}")
    amax = np.max(np.abs(A))
    if np.max(np.abs(A - A.T)) > 1e-10 * max(amax, 1e-300):
        raise InvalidInputError("A is not symmetric")
    if k is None:
        k = n
    if not 1 <= k <= n:
        raise InvalidInputError(f"k must lie in [1, {n}], got {k}")
    if which not in ("largest", "smallest"):
        raise InvalidInputError(f"which must be 'largest' or 'smallest', got {which!r}")
    A = 0.5 * (A + A.T)

    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX_N else "lapack"
    if method == "jacobi":
        w, V = _jacobi(A, tol, max_sweeps)
    elif method == "lapack":
        w, V = np.linalg.eigh(A)
    else:
        raise InvalidInputError(f"unknown eigensolver {method!r}")

    order = np.argsort(-w if which == "largest" else w, kind="stable")[:k]
    w = w[order]
    V = V[:, order]
    V /= np.linalg.norm(V, axis=0)
    return w, V


@dataclass(frozen=True)
class NeighborGraph:
    """k-nearest-neighbour graph.

    ``indices[i]`` lists the ``k`` neighbours of node ``i`` nearest first and
    ``weights[i]`` the matching Euclidean distances. When ``symmetric`` is set,
    ``edges`` holds the union graph: an edge exists if either endpoint lists
    the other.
    """

    n: int
    k: int
    indices: np.ndarray
    weights: np.ndarray
    symmetric: bool

    @property
    def edges(self):
        """Boolean (n, n) adjacency mask."""
        mask = np.zeros((self.n, self.n), dtype=bool)
        rows = np.repeat(np.arange(self.n), self.k)
        mask[rows, self.indices.ravel()] = True
        if self.symmetric:
            mask |= mask.T
        return mask

    def edge_lengths(self):
        """(n, n) matrix of edge lengths, ``inf`` where there is no edge."""
        L = np.full((self.n, self.n), np.inf)
        rows = np.repeat(np.arange(self.n), self.k)
        L[rows, self.indices.ravel()] = self.weights.ravel()
        if self.symmetric:
            L = np.minimum(L, L.T)
        np.fill_diagonal(L, np.inf)
        return L

    def n_components(self):
        mask = self.edges
        n_comp, _ = csgraph.connected_components(mask | mask.T, directed=False)
        return int(n_comp)


def knn_graph(X, k, symmetrize=True, sq_dist=None):
    """Nearest neighbours of every row of ``X`` by Euclidean distance.

    Self-matches are excluded; ties are broken by the lower sample index.
    """
    X = as_matrix(X)
    n = X.shape[0]
    if not 1 <= k < n:
        raise InvalidInputError(f"k must satisfy 1 <= k < n={n}, got {k}")
    D = pairwise_sq_distances(X) if sq_dist is None else sq_dist
    D = D.copy()
    np.fill_diagonal(D, np.inf)
    idx = np.argsort(D, axis=1, kind="stable")[:, :k]
    w = np.sqrt(np.take_along_axis(D, idx, axis=1))
    return NeighborGraph(n=n, k=k, indices=idx, weights=w, symmetric=bool(symmetrize))


def shortest_paths(g):
    """All-pairs geodesic distances over the edges of a symmetrised graph.

    Raises ConnectivityError (before returning anything) when the graph has
    more than one connected component.
    """
    if not g.symmetric:
        raise InvalidInputError("shortest_paths needs a symmetrised graph")
    n_comp = g.n_components()
    if n_comp > 1:
        raise ConnectivityError(n_comp, k=g.k)
    lengths = g.edge_lengths()
    # inf marks "no edge", so zero-length edges between duplicate points survive
    graph = csgraph.csgraph_from_dense(lengths, null_value=np.inf)
    G = csgraph.shortest_path(graph, method="D", directed=False)
    G = np.triu(G, 1)
    return G + G.T


def double_center(Dsq):
    """Classical-MDS Gram matrix ``-0.5 * J @ Dsq @ J`` with ``J = I - 11'/n``."""
    D = as_matrix(Dsq, "Dsq")
    if D.shape[0] != D.shape[1]:
        raise InvalidInputError(f"Dsq must be square, got {D.shape}")
    B = D - D.mean(axis=0, keepdims=True)
    B = B - B.mean(axis=1, keepdims=True)
    B = -0.5 * B
    return 0.5 * (B + B.T)


def heat_kernel(g, heat_t="auto"):
    """Dense heat-kernel affinities ``exp(-d^2 / t)`` on the edges of ``g``.

    ``heat_t="auto"`` sets ``t`` to the mean squared edge length; ``inf``
    gives the plain 0/1 adjacency. Returns the symmetric weight matrix and
    the ``t`` used.
    """
    lengths = g.edge_lengths()
    if not g.symmetric:
        raise InvalidInputError("heat_kernel needs a symmetrised graph")
    edges = np.isfinite(lengths)
    sq = np.where(edges, lengths, 0.0) ** 2
    if heat_t == "auto" or heat_t is None:
        t = float(np.mean(sq[edges])) if np.any(edges) else 1.0
        if t == 0.0:
            t = 1.0
    else:
        t = float(heat_t)
        if not t > 0:
            raise InvalidInputError(f"heat_t must be > 0, got {heat_t}")
    with np.errstate(over="ignore"):
        W = np.where(edges, np.exp(-sq / t), 0.0)
    return W, t
