"""Teacher-student feature selection.

A student network ``d -> hidden (ReLU) -> l`` is trained to reproduce the
min-max normalised teacher codes while an L2,1 penalty on its first-layer
weights pushes whole input rows to zero. Features are then ranked by the
squared norm of their first-layer row.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .linalg import as_matrix
from .neural import DenseNet, TrainConfig, forward, train
from .teacher import fit_teacher

__all__ = [
    "StudentConfig",
    "SelectionResult",
    "L21Penalty",
    "normalize_codes",
    "l21_norm",
    "l21_grad",
    "tsfs_loss",
    "train_student",
    "feature_scores",
    "ranking_from_scores",
    "select_top",
    "n_selected",
    "run_tsfs",
]


@dataclass(frozen=True)
class StudentConfig:
    hidden: int = 20
    lam: float = 0.1
    epochs: int = 500
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    l21_epsilon: float = 1e-8

    def __post_init__(self):
        if self.hidden < 1:
            raise InvalidInputError("hidden must be >= 1")
        if self.lam < 0:
            raise InvalidInputError("lambda must be >= 0")
        if self.l21_epsilon <= 0:
            raise InvalidInputError("l21_epsilon must be > 0")


def normalize_codes(Y):
    """Per-column min-max scaling onto [0, 1]; constant columns map to 0."""
    Y = as_matrix(Y, "Y")
    lo = Y.min(axis=0)
    span = Y.max(axis=0) - lo
    if np.any(span == 0):
        warnings.warn(f"{int(np.sum(span == 0))} constant code column(s) mapped to 0",
                      RuntimeWarning, stacklevel=2)
    safe = np.where(span > 0, span, 1.0)
    return np.clip(np.where(span > 0, (Y - lo) / safe, 0.0), 0.0, 1.0)


def l21_norm(W):
    """Sum of the Euclidean norms of the rows of ``W``."""
    W = np.asarray(W, dtype=np.float64)
    return float(np.sum(np.sqrt(np.sum(W * W, axis=1))))


def l21_grad(W, epsilon=1e-8):
    """Smoothed (sub)gradient of :func:`l21_norm`: each row over max(norm, epsilon)."""
    W = np.asarray(W, dtype=np.float64)
    norms = np.sqrt(np.sum(W * W, axis=1, keepdims=True))
    return W / np.maximum(norms, epsilon)


class L21Penalty:
    """``lam * ||W_layer||_{2,1}`` as a training regulariser."""

    def __init__(self, lam, layer=0, epsilon=1e-8):
        self.lam = float(lam)
        self.layer = layer
        self.epsilon = epsilon

    def __call__(self, net):
        grads = [None] * len(net.weights)
        W = net.weights[self.layer]
        if self.lam == 0.0:
            return 0.0, grads
        grads[self.layer] = self.lam * l21_grad(W, self.epsilon)
        return self.lam * l21_norm(W), grads


def tsfs_loss(net, X, codes, lam):
    """Student objective ``||codes - net(X)||_F^2 / (2n) + lam * ||first-layer weights||_{2,1}``.

    ``codes`` are the already normalized teacher codes.
    """
    X = as_matrix(X)
    codes = as_matrix(codes, "codes")
    out, _ = forward(net, X)
    if out.shape != codes.shape:
        raise InvalidInputError(f"network output {out.shape} does not match codes {codes.shape}")
    R = codes - out
    return float(np.sum(R * R)) / (2.0 * X.shape[0]) + lam * l21_norm(net.weights[0])


def train_student(X, Y, cfg=None, init=None):
    """Fit the student to teacher codes ``Y``.

    ``init`` optionally supplies the starting DenseNet (sizes ``d, hidden, l``);
    otherwise one is drawn from ``cfg.seed``.

    Returns the trained network and the per-epoch objective.
    """
    cfg = cfg or StudentConfig()
    X = as_matrix(X)
    Y = as_matrix(Y, "Y")
    if X.shape[0] != Y.shape[0]:
        raise InvalidInputError(f"X has {X.shape[0]} rows, codes have {Y.shape[0]}")
    codes = normalize_codes(Y)
    if init is None:
        init = DenseNet((X.shape[1], cfg.hidden, Y.shape[1]), seed=cfg.seed)
    elif init.sizes != (X.shape[1], cfg.hidden, Y.shape[1]):
        raise InvalidInputError(f"initial network has sizes {init.sizes}")
    tcfg = TrainConfig(epochs=cfg.epochs, batch_size=cfg.batch_size,
                       learning_rate=cfg.learning_rate, seed=cfg.seed)
    penalty = L21Penalty(cfg.lam, layer=0, epsilon=cfg.l21_epsilon)
    return train(init, X, codes, loss="squared_error", regularizer=penalty, cfg=tcfg)


def feature_scores(model):
    """Squared Euclidean norm of every first-layer row (the diagonal of ``W @ W.T``)."""
    W = model.weights[0] if isinstance(model, DenseNet) else np.asarray(model, dtype=np.float64)
    return np.sum(W * W, axis=1)


def ranking_from_scores(scores, higher_is_better=True):
    """Feature indices best first; equal scores keep the lower index first."""
    scores = np.asarray(scores, dtype=np.float64)
    return np.argsort(-scores if higher_is_better else scores, kind="stable")


def n_selected(d, p):
    """``floor(p * d / 100)`` clamped to at least one feature."""
    if not 0 < p <= 100:
        raise InvalidInputError(f"percentage must lie in (0, 100], got {p}")
    # nudge guards against 0.07 * 100 style round-off landing below an integer
    return max(1, int(np.floor(p * d / 100.0 + 1e-9)))


@dataclass
class SelectionResult:
    """Scores, full ranking, and the top-``m`` slice for a percentage ``p``."""

    scores: np.ndarray
    ranking: np.ndarray
    p: float
    m: int
    method: str = "tsfs"
    teacher: str | None = None
    seeds: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def selected(self):
        return self.ranking[:self.m]

    def with_percent(self, p):
        """Re-slice the same ranking for another percentage."""
        return SelectionResult(self.scores, self.ranking, p, n_selected(self.scores.size, p),
                               self.method, self.teacher, dict(self.seeds), dict(self.meta))

    def to_dict(self):
        return {
            "method": self.method,
            "teacher": self.teacher,
            "seeds": self.seeds,
            "p": self.p,
            "m": self.m,
            "scores": [float(s) for s in self.scores],
            "ranking": [int(i) for i in self.ranking],
            "selected": [int(i) for i in self.selected],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_json())

    def save_indices(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("".join(f"{int(i)}\n" for i in self.selected))

    @classmethod
    def from_dict(cls, data):
        scores = np.asarray(data["scores"], dtype=np.float64)
        return cls(scores=scores, ranking=np.asarray(data["ranking"], dtype=np.int64),
                   p=data["p"], m=int(data["m"]), method=data.get("method", "tsfs"),
                   teacher=data.get("teacher"), seeds=dict(data.get("seeds") or {}))

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def select_top(scores, p, higher_is_better=True, **meta):
    """Keep the best ``max(1, floor(p*d/100))`` features of a score vector."""
    scores = np.asarray(scores, dtype=np.float64)
    m = n_selected(scores.size, p)
    ranking = ranking_from_scores(scores, higher_is_better)
    return SelectionResult(scores=scores, ranking=ranking, p=p, m=m, **meta)


def run_tsfs(ds, teacher_spec, p, cfg=None, embedding=None):
    """Teacher step, student step and feature selection in one call.

    Parameters
    ----------
    ds : Dataset
    teacher_spec : TeacherSpec
        Which teacher to fit. Supervised teachers need ``ds.labels``.
    p : float
        Percentage of features to keep.
    cfg : StudentConfig
    embedding : Embedding, optional
        Precomputed teacher output; skips the teacher step (used for caching).
    """
    cfg = cfg or StudentConfig()
    if embedding is None:
        embedding = fit_teacher(ds, teacher_spec)
    model, history = train_student(ds.X, embedding.Y, cfg)
    result = select_top(feature_scores(model), p, method="tsfs", teacher=embedding.method,
                        seeds={"teacher": int(embedding.seed), "student": int(cfg.seed)})
    result.meta = {"loss_history": history, "model": model, "embedding": embedding}
    return result
