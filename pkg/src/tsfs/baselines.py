"""Comparison feature scorers: variance, Laplacian Score, RSR and AEFS.

Every scorer returns a :class:`BaselineResult`; ``higher_is_better`` records
the polarity (only the Laplacian Score prefers low values).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConnectivityError, InvalidInputError
from .linalg import as_matrix, heat_kernel, knn_graph
from .neural import DenseNet, TrainConfig, train
from .student import L21Penalty, SelectionResult, n_selected, ranking_from_scores

__all__ = [
    "BaselineResult",
    "LAPLACIAN_SENTINEL",
    "variance_score",
    "laplacian_score",
    "rsr_objective",
    "rsr",
    "WeightDecay",
    "aefs",
    "random_score",
    "BASELINES",
]

# Laplacian scores are generalized Rayleigh quotients of L against D and
# therefore lie in [0, 2]; constant features get a strictly worse value.
LAPLACIAN_SENTINEL = 3.0


@dataclass
class BaselineResult:
    method: str
    scores: np.ndarray
    higher_is_better: bool = True
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.scores = np.asarray(self.scores, dtype=np.float64)

    @property
    def ranking(self):
        return ranking_from_scores(self.scores, self.higher_is_better)

    def to_selection(self, p, seeds=None):
        """Top-``p`` percent as a SelectionResult tagged with this method."""
        return SelectionResult(scores=self.scores, ranking=self.ranking, p=p,
                               m=n_selected(self.scores.size, p), method=self.method,
                               teacher=None, seeds=dict(seeds or {}))


def variance_score(X):
    """Per-feature variance with the 1/n denominator."""
    X = as_matrix(X)
    return BaselineResult("variance", X.var(axis=0), True)


def laplacian_score(X, k_neighbors=5, heat_t="auto"):
    """Laplacian Score of every feature (lower is better).

    For a feature ``f``, with heat-kernel affinities ``S`` on the symmetrised
    kNN graph, ``D = diag(S 1)`` and ``L = D - S``::

        f~  = f - (f' D 1 / 1' D 1) 1
        L_r = f~' L f~ / f~' D f~

    Features that are constant get :data:`LAPLACIAN_SENTINEL`.
    """
    X = as_matrix(X)
    g = knn_graph(X, k_neighbors, symmetrize=True)
    n_comp = g.n_components()
    if n_comp > 1:
        raise ConnectivityError(n_comp, k=k_neighbors)
    S, t = heat_kernel(g, heat_t)
    deg = S.sum(axis=1)
    F = X - (deg @ X) / deg.sum()
    LF = deg[:, None] * F - S @ F
    num = np.sum(F * LF, axis=0)
    den = np.sum(deg[:, None] * F * F, axis=0)
    scale = np.sum(deg[:, None] * X * X, axis=0)
    constant = (np.ptp(X, axis=0) == 0) | (den <= 1e-14 * np.maximum(scale, 1e-300))
    scores = np.where(constant, LAPLACIAN_SENTINEL, num / np.where(constant, 1.0, den))
    return BaselineResult("laplacian_score", scores, False,
                          {"heat_t": t, "k_neighbors": k_neighbors})


def rsr_objective(X, W, lam, smoothing=0.0):
    """``sum_i sqrt(||(X - XW)_i||^2 + s) + lam * sum_j sqrt(||W_j||^2 + s)``."""
    E = X - X @ W
    res = np.sum(np.sqrt(np.sum(E * E, axis=1) + smoothing))
    reg = np.sum(np.sqrt(np.sum(W * W, axis=1) + smoothing))
    return float(res + lam * reg)


def rsr(X, lam=100.0, max_iters=200, tol=1e-6, smoothing=1e-8):
    """Regularized self-representation solved by iteratively reweighted least squares.

    Minimises the smoothed form of ``||X - XW||_{2,1} + lam ||W||_{2,1}``
    over ``W`` (d x d). Each step freezes the row weights
    ``1 / (2 sqrt(||row||^2 + s))`` of the residual and of ``W`` and solves
    ``(X' Gr X + lam Gw) W = X' Gr X``; this majorise-minimise step never
    increases the smoothed objective. Scores are the row norms of ``W``.

    The residual term grows with ``n`` while the penalty does not, so ``lam``
    must be large enough that noise features stop representing themselves.
    """
    X = as_matrix(X)
    if not lam > 0:
        raise InvalidInputError(f"lambda must be > 0, got {lam}")
    d = X.shape[1]
    XtX = X.T @ X
    W = np.linalg.solve(XtX + lam * np.eye(d), XtX)
    history = [rsr_objective(X, W, lam, smoothing)]
    converged = False
    for _ in range(max_iters):
        E = X - X @ W
        gr = 0.5 / np.sqrt(np.sum(E * E, axis=1) + smoothing)
        gw = 0.5 / np.sqrt(np.sum(W * W, axis=1) + smoothing)
        A = X.T @ (gr[:, None] * X)
        W = np.linalg.solve(A + lam * np.diag(gw), A)
        history.append(rsr_objective(X, W, lam, smoothing))
        if abs(history[-2] - history[-1]) <= tol * max(abs(history[-2]), 1e-300):
            converged = True
            break
    if not converged:
        warnings.warn(f"RSR did not converge in {max_iters} iterations", RuntimeWarning,
                      stacklevel=2)
    scores = np.sqrt(np.sum(W * W, axis=1))
    return BaselineResult("rsr", scores, True,
                          {"W": W, "objective": history, "converged": converged, "lam": lam})


class WeightDecay:
    """``beta * sum ||W_i||_F^2`` over the listed layers (all by default)."""

    def __init__(self, beta, layers=None):
        self.beta = float(beta)
        self.layers = layers

    def __call__(self, net):
        layers = range(len(net.weights)) if self.layers is None else self.layers
        grads = [None] * len(net.weights)
        value = 0.0
        for i in layers:
            W = net.weights[i]
            value += self.beta * float(np.sum(W * W))
            grads[i] = 2.0 * self.beta * W
        return value, grads


class _Sum:
    def __init__(self, *terms):
        self.terms = terms

    def __call__(self, net):
        value = 0.0
        grads = [None] * len(net.weights)
        for term in self.terms:
            v, gs = term(net)
            value += v
            for i, g in enumerate(gs):
                if g is not None:
                    grads[i] = g if grads[i] is None else grads[i] + g
        return value, grads


def aefs(X, lam=1.0, beta=1e-4, hidden=16, cfg=None, seed=0, epsilon=1e-8):
    """Autoencoder feature selection.

    Trains ``d -> hidden (ReLU) -> d`` on ``||X - Xhat||_F^2 / (2n)`` plus
    ``lam ||W1||_{2,1}`` and ``beta (||W1||_F^2 + ||W2||_F^2)``; scores are the
    squared first-layer row norms.

    Dropping a column of variance ``v`` costs about ``v / 2`` in the data term,
    so ``lam`` must be of the order of the feature variances for the penalty
    to prune anything; the default suits unit-scale features.
    """
    X = as_matrix(X)
    if hidden < 1:
        raise InvalidInputError("hidden must be >= 1")
    cfg = cfg or TrainConfig(seed=seed)
    net = DenseNet((X.shape[1], hidden, X.shape[1]), seed=seed)
    penalty = _Sum(L21Penalty(lam, layer=0, epsilon=epsilon), WeightDecay(beta))
    net, history = train(net, X, X, loss="squared_error", regularizer=penalty, cfg=cfg)
    W = net.weights[0]
    return BaselineResult("aefs", np.sum(W * W, axis=1), True,
                          {"net": net, "loss": history, "lam": lam, "beta": beta})


def random_score(X, seed=0):
    """Uniform random scores: the chance-level control for benchmarks."""
    X = as_matrix(X)
    return BaselineResult("random", np.random.default_rng(seed).random(X.shape[1]), True)


BASELINES = {
    "variance": lambda X, seed=0, **kw: variance_score(X),
    "laplacian_score": lambda X, seed=0, **kw: laplacian_score(X, **kw),
    "rsr": lambda X, seed=0, **kw: rsr(X, **kw),
    "aefs": lambda X, seed=0, **kw: aefs(X, seed=seed, **kw),
    "random": lambda X, seed=0, **kw: random_score(X, seed=seed),
}
