"""Teachers: maps from the data matrix to a low-dimensional code matrix.

Unsupervised teachers (PCA, classical MDS, Isomap, LLE, spectral embedding,
t-SNE) are transductive and embed exactly the rows they are given. The
supervised teacher trains a small MLP classifier and returns the activations
of its penultimate layer.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConnectivityError, InvalidInputError, NumericalError
from .linalg import (as_matrix, double_center, heat_kernel, knn_graph,
                     pairwise_sq_distances, shortest_paths, sym_eig)
from .neural import DenseNet, TrainConfig, one_hot, train

__all__ = [
    "Embedding",
    "TeacherSpec",
    "TsneParams",
    "METHODS",
    "fit_pca",
    "fit_mds",
    "fit_isomap",
    "lle_weights",
    "fit_lle",
    "fit_spectral",
    "conditional_probabilities",
    "joint_probabilities",
    "fit_tsne",
    "fit_supervised_mlp",
    "fit_teacher",
]

METHODS = ("pca", "mds", "isomap", "lle", "spectral", "tsne", "supervised_mlp")


@dataclass
class Embedding:
    """Teacher output ``Y`` (n x l) with the recipe that produced it."""

    Y: np.ndarray
    method: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.Y = as_matrix(self.Y, "Y")

    @property
    def dim(self):
        return self.Y.shape[1]

    def save_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([f"y{j}" for j in range(self.dim)])
            for row in self.Y:
                w.writerow([repr(float(v)) for v in row])


def _check_dim(X, l):
    n, d = X.shape
    if not 1 <= l < d:
        raise InvalidInputError(f"embedding dimension must satisfy 1 <= l < d={d}, got {l}")
    if l >= n:
        raise InvalidInputError(f"embedding dimension must be below n={n}, got {l}")


def _fix_signs(V):
    """Flip columns so the entry of largest magnitude is positive."""
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def fit_pca(X, l=2, eig_method="auto"):
    """Projections of the centred data on the top-``l`` covariance eigenvectors."""
    X = as_matrix(X)
    _check_dim(X, l)
    Xc = X - X.mean(axis=0)
    C = Xc.T @ Xc / max(X.shape[0] - 1, 1)
    w, V = sym_eig(C, l, "largest", method=eig_method)
    V = _fix_signs(V)
    return Embedding(Xc @ V, "pca", {"l": l}, info={"explained_variance": w})


def _mds_from_sq(Dsq, l, eig_method):
    B = double_center(Dsq)
    w, V = sym_eig(B, l, "largest", method=eig_method)
    if np.any(w < 0):
        warnings.warn(f"{int(np.sum(w < 0))} negative MDS eigenvalue(s) clamped to 0",
                      RuntimeWarning, stacklevel=3)
    V = _fix_signs(V)
    return V * np.sqrt(np.maximum(w, 0.0)), w


def fit_mds(X, l=2, precomputed=False, eig_method="auto"):
    """Classical (Torgerson) MDS.

    With ``precomputed=True`` ``X`` is an (n, n) matrix of plain, unsquared
    dissimilarities.
    """
    if precomputed:
        D = as_matrix(X, "D")
        if D.shape[0] != D.shape[1]:
            raise InvalidInputError("precomputed dissimilarities must be square")
        if not 1 <= l < D.shape[0]:
            raise InvalidInputError(f"embedding dimension must lie in [1, n), got {l}")
        Dsq = D * D
    else:
        X = as_matrix(X)
        _check_dim(X, l)
        Dsq = pairwise_sq_distances(X)
    Y, w = _mds_from_sq(Dsq, l, eig_method)
    return Embedding(Y, "mds", {"l": l}, info={"eigenvalues": w})


def fit_isomap(X, l=2, k_neighbors=10, eig_method="auto"):
    """Isomap: classical MDS on kNN-graph geodesic distances."""
    X = as_matrix(X)
    _check_dim(X, l)
    g = knn_graph(X, k_neighbors, symmetrize=True)
    G = shortest_paths(g)
    Y, w = _mds_from_sq(G * G, l, eig_method)
    return Embedding(Y, "isomap", {"l": l, "k_neighbors": k_neighbors},
                     info={"eigenvalues": w})


def lle_weights(X, k_neighbors, reg=1e-3):
    """Local reconstruction weights of every point from its ``k`` neighbours.

    Returns the neighbour indices (n, k) and weights (n, k); each weight row
    sums to one.
    """
    X = as_matrix(X)
    g = knn_graph(X, k_neighbors, symmetrize=False)
    n, k = X.shape[0], k_neighbors
    weights = np.empty((n, k))
    ones = np.ones(k)
    for i in range(n):
        Z = X[g.indices[i]] - X[i]
        G = Z @ Z.T
        if reg > 0:
            tr = np.trace(G)
            G = G + (reg * tr / k if tr > 0 else reg) * np.eye(k)
        elif np.linalg.matrix_rank(G) < k:
            raise NumericalError(
                f"local Gram matrix of point {i} is singular; use a regulariser reg > 0")
        try:
            w = np.linalg.solve(G, ones)
        except np.linalg.LinAlgError:
            raise NumericalError(
                f"local Gram matrix of point {i} is singular; use a regulariser reg > 0") from None
        weights[i] = w / w.sum()
    return g.indices, weights


def fit_lle(X, l=2, k_neighbors=10, reg=1e-3, eig_method="auto"):
    """Locally linear embedding (bottom eigenvectors of ``(I-W)'(I-W)``)."""
    X = as_matrix(X)
    _check_dim(X, l)
    if k_neighbors < l:
        raise InvalidInputError(f"k_neighbors must be >= l={l}")
    n = X.shape[0]
    idx, w = lle_weights(X, k_neighbors, reg)
    W = np.zeros((n, n))
    W[np.repeat(np.arange(n), k_neighbors), idx.ravel()] = w.ravel()
    IW = np.eye(n) - W
    M = IW.T @ IW
    vals, V = sym_eig(M, l + 1, "smallest", method=eig_method)
    V = _fix_signs(V[:, 1:])
    return Embedding(V, "lle", {"l": l, "k_neighbors": k_neighbors, "reg": reg},
                     info={"eigenvalues": vals})


def fit_spectral(X, l=2, k_neighbors=10, heat_t="auto", eig_method="auto"):
    """Laplacian eigenmaps on the heat-kernel kNN graph.

    Solves ``L v = lam D v`` through the symmetric form
    ``D^-1/2 L D^-1/2 u = lam u`` and skips the constant solution.
    """
    X = as_matrix(X)
    _check_dim(X, l)
    g = knn_graph(X, k_neighbors, symmetrize=True)
    n_comp = g.n_components()
    if n_comp > 1:
        raise ConnectivityError(n_comp, k=k_neighbors)
    W, t = heat_kernel(g, heat_t)
    deg = W.sum(axis=1)
    L = np.diag(deg) - W
    s = 1.0 / np.sqrt(deg)
    Lsym = s[:, None] * L * s[None, :]
    vals, U = sym_eig(0.5 * (Lsym + Lsym.T), l + 1, "smallest", method=eig_method)
    V = s[:, None] * U[:, 1:]
    V /= np.linalg.norm(V, axis=0)
    V = _fix_signs(V)
    return Embedding(V, "spectral", {"l": l, "k_neighbors": k_neighbors, "heat_t": t},
                     info={"eigenvalues": vals})


@dataclass(frozen=True)
class TsneParams:
    perplexity: float | None = None  # None -> min(30, (n - 1) / 3)
    learning_rate: float = 200.0
    iterations: int = 1000
    early_exaggeration: float = 12.0
    exaggeration_iters: int = 250
    initial_momentum: float = 0.5
    final_momentum: float = 0.8
    momentum_switch: int = 250
    init_scale: float = 1e-4
    min_gain: float = 0.01
    sigma_tol: float = 1e-5
    sigma_max_iter: int = 50


def _row_entropy(Dr, beta):
    """Entropy (nats) of rows ``exp(-Dr * beta)``; ``Dr`` rows shifted to min 0, diagonal inf."""
    E = np.exp(-Dr * beta[:, None])
    S = E.sum(axis=1)
    H = np.log(S) + beta * np.sum(np.where(np.isfinite(Dr), Dr, 0.0) * E, axis=1) / S
    return H, E / S[:, None]


def conditional_probabilities(Dsq, perplexity, tol=1e-5, max_iter=50):
    """Gaussian conditionals ``p(j|i)`` whose entropy matches ``log(perplexity)``.

    The bandwidth of every row is found by bisection on ``log(sigma)``
    (bracket found by doubling steps first).

    Returns
    -------
    P : (n, n) ndarray
        Row-stochastic conditional probabilities with zero diagonal.
    sigma : (n,) ndarray
    entropy : (n,) ndarray
        Achieved entropies in nats.
    """
    D = as_matrix(Dsq, "Dsq").copy()
    n = D.shape[0]
    if not 1 < perplexity < n - 1 + 1e-12:
        raise InvalidInputError(f"perplexity must lie in (1, n-1={n - 1}], got {perplexity}")
    np.fill_diagonal(D, np.inf)
    Dr = D - D.min(axis=1, keepdims=True)
    target = np.log(perplexity)

    mean_d = np.array([np.mean(r[np.isfinite(r)]) for r in Dr])
    log_sigma = 0.5 * np.log(np.where(mean_d > 0, mean_d, 1.0))
    # equidistant rows give a uniform conditional whatever sigma is
    flat = mean_d == 0
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    step = np.ones(n)
    H = P = None
    for _ in range(max_iter):
        beta = 0.5 * np.exp(-2.0 * log_sigma)
        H, P = _row_entropy(Dr, beta)
        active = (np.abs(H - target) > tol) & ~flat
        if not np.any(active):
            break
        too_high = active & (H > target)
        too_low = active & (H < target)
        hi[too_high] = log_sigma[too_high]
        lo[too_low] = log_sigma[too_low]
        both = np.isfinite(lo) & np.isfinite(hi)
        nxt = np.where(both, 0.5 * (lo + hi),
                       np.where(np.isfinite(hi), hi - step, lo + step))
        step = np.where(both, step, 2.0 * step)
        # bounded so exp() stays finite when the target is out of reach
        log_sigma = np.clip(np.where(active, nxt, log_sigma), -300.0, 300.0)
    np.fill_diagonal(P, 0.0)
    return P, np.exp(log_sigma), H


def joint_probabilities(P_cond):
    """Symmetrised joint affinities ``(P + P') / (2n)``."""
    n = P_cond.shape[0]
    P = (P_cond + P_cond.T) / (2.0 * n)
    np.fill_diagonal(P, 0.0)
    return P / P.sum()


def _kl(P, Q):
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / np.maximum(Q[mask], 1e-300))))


def fit_tsne(X, l=2, params=None, seed=0):
    """Exact t-SNE with momentum, adaptive gains and early exaggeration.

    ``info["kl"]`` holds the KL divergence after every iteration (measured
    against the un-exaggerated affinities).
    """
    params = params or TsneParams()
    X = as_matrix(X)
    _check_dim(X, l)
    n = X.shape[0]
    perplexity = params.perplexity
    if perplexity is None:
        perplexity = min(30.0, (n - 1) / 3.0)
    if not perplexity < n - 1:
        raise InvalidInputError(f"perplexity must be < n-1={n - 1}, got {perplexity}")
    Pc, sigma, entropy = conditional_probabilities(
        pairwise_sq_distances(X), perplexity, params.sigma_tol, params.sigma_max_iter)
    P = joint_probabilities(Pc)

    rng = np.random.default_rng(seed)
    Y = params.init_scale * rng.standard_normal((n, l))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)
    kl = []
    for it in range(params.iterations):
        exag = params.early_exaggeration if it < params.exaggeration_iters else 1.0
        momentum = params.initial_momentum if it < params.momentum_switch else params.final_momentum
        sq = np.sum(Y * Y, axis=1)
        num = 1.0 / (1.0 + np.maximum(sq[:, None] + sq[None, :] - 2.0 * Y @ Y.T, 0.0))
        np.fill_diagonal(num, 0.0)
        Q = num / num.sum()
        PQ = (exag * P - Q) * num
        grad = 4.0 * (np.diag(PQ.sum(axis=1)) - PQ) @ Y
        if not np.all(np.isfinite(grad)):
            raise NumericalError(f"non-finite t-SNE gradient at iteration {it}")
        same = (grad > 0) == (update > 0)
        gains = np.where(same, gains * 0.8, gains + 0.2)
        np.maximum(gains, params.min_gain, out=gains)
        update = momentum * update - params.learning_rate * gains * grad
        Y = Y + update
        Y -= Y.mean(axis=0)
        kl.append(_kl(P, Q))
    record = {"l": l, "perplexity": perplexity, "learning_rate": params.learning_rate,
              "iterations": params.iterations}
    return Embedding(Y, "tsne", record, seed=seed,
                     info={"kl": kl, "sigma": sigma, "entropy": entropy, "P": P})


def fit_supervised_mlp(ds, l=2, hidden_sizes=(64,), epochs=200, seed=0, batch_size=32,
                       learning_rate=1e-3):
    """Train ``d -> hidden... -> l -> classes`` with softmax cross-entropy.

    The code matrix is the ReLU output of the width-``l`` penultimate layer.
    """
    if ds.labels is None:
        raise InvalidInputError("the supervised teacher needs class labels")
    if ds.n_classes < 2:
        raise InvalidInputError("the supervised teacher needs at least two classes")
    _check_dim(ds.X, l)
    sizes = (ds.d, *hidden_sizes, l, ds.n_classes)
    net = DenseNet(sizes, output="softmax", seed=seed)
    cfg = TrainConfig(epochs=epochs, batch_size=batch_size, learning_rate=learning_rate, seed=seed)
    net, history = train(net, ds.X, one_hot(ds.labels), loss="softmax_ce", cfg=cfg)
    acc = float(np.mean(np.argmax(net.predict(ds.X), axis=1) == ds.labels))
    Y = net.hidden(ds.X, layer=-1)
    return Embedding(Y, "supervised_mlp",
                     {"l": l, "hidden_sizes": list(hidden_sizes), "epochs": epochs},
                     seed=seed, info={"train_accuracy": acc, "loss": history, "net": net})


@dataclass(frozen=True)
class TeacherSpec:
    """Which teacher to run and with what parameters."""

    method: str = "tsne"
    dim: int = 2
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        method = self.method.replace("-", "_")
        if method not in METHODS:
            raise InvalidInputError(f"unknown teacher {self.method!r}; choose from {METHODS}")
        object.__setattr__(self, "method", method)

    @property
    def supervised(self):
        return self.method == "supervised_mlp"

    def key(self):
        return (self.method, self.dim, self.seed, tuple(sorted(self.params.items())))


def fit_teacher(ds, spec):
    """Fit the teacher named by ``spec`` on dataset ``ds``."""
    X, l, p = ds.X, spec.dim, dict(spec.params)
    m = spec.method
    if m == "pca":
        emb = fit_pca(X, l, **p)
    elif m == "mds":
        emb = fit_mds(X, l, **p)
    elif m == "isomap":
        emb = fit_isomap(X, l, **p)
    elif m == "lle":
        emb = fit_lle(X, l, **p)
    elif m == "spectral":
        emb = fit_spectral(X, l, **p)
    elif m == "tsne":
        return fit_tsne(X, l, TsneParams(**p), seed=spec.seed)
    else:
        return fit_supervised_mlp(ds, l, seed=spec.seed, **p)
    emb.seed = spec.seed
    return emb
