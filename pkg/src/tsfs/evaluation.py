"""Measurement protocol for selected feature subsets.

Clustering quality (k-means, ACC with Hungarian matching, NMI averaged over
restarts), 5-fold MLP classification accuracy and 5-fold MLP reconstruction
error of the full data from the selected columns.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .datasets import kfold, stratified_kfold
from .errors import InvalidInputError
from .linalg import as_matrix
from .neural import DenseNet, TrainConfig, one_hot, train

__all__ = [
    "ClusteringRun",
    "MetricReport",
    "kmeans",
    "hungarian",
    "clustering_acc",
    "nmi",
    "clustering_eval",
    "classify_cv",
    "reconstruct_cv",
    "evaluate",
]


@dataclass
class ClusteringRun:
    labels: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations: int
    seed: int
    inertia_history: list = field(default_factory=list)


def _sq_dist_to(X, C):
    d = np.sum(X * X, axis=1)[:, None] - 2.0 * X @ C.T + np.sum(C * C, axis=1)[None, :]
    return np.maximum(d, 0.0)


def kmeans(X, k, seed=0, max_iter=300):
    """Lloyd's algorithm from ``k`` distinct, randomly sampled data points.

    A cluster that empties is re-seeded with the point lying farthest from
    its current centroid.
    """
    X = as_matrix(X)
    n = X.shape[0]
    if not 1 <= k <= n:
        raise InvalidInputError(f"k must lie in [1, n={n}], got {k}")
    rng = np.random.default_rng(seed)
    _, first = np.unique(X, axis=0, return_index=True)
    pool = np.sort(first) if first.size >= k else np.arange(n)
    C = X[rng.choice(pool, size=k, replace=False)].copy()
    labels = np.argmin(_sq_dist_to(X, C), axis=1)
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        for j in range(k):
            members = labels == j
            if np.any(members):
                C[j] = X[members].mean(axis=0)
            else:
                far = np.argmax(np.sum((X - C[labels]) ** 2, axis=1))
                C[j] = X[far]
                labels[far] = j
        history.append(float(np.sum((X - C[labels]) ** 2)))
        new = np.argmin(_sq_dist_to(X, C), axis=1)
        if np.array_equal(new, labels):
            break
        labels = new
    inertia = float(np.sum((X - C[labels]) ** 2))
    return ClusteringRun(labels, C, inertia, it, seed, history)


def hungarian(cost):
    """Minimum-cost perfect assignment on a square cost matrix.

    Kuhn-Munkres with row/column potentials, O(k^3). Returns ``perm`` with
    row ``i`` assigned to column ``perm[i]``.
    """
    C = as_matrix(cost, "cost")
    k = C.shape[0]
    if C.shape[1] != k:
        raise InvalidInputError(f"cost matrix must be square, got {C.shape}")
    INF = np.inf
    u = np.zeros(k + 1)
    v = np.zeros(k + 1)
    match = np.zeros(k + 1, dtype=int)  # match[col] = row, 1-based, 0 = free
    way = np.zeros(k + 1, dtype=int)
    for i in range(1, k + 1):
        match[0] = i
        j0 = 0
        minv = np.full(k + 1, INF)
        used = np.zeros(k + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = match[j0]
            free = ~used[1:]
            cols = np.flatnonzero(free) + 1
            cur = C[i0 - 1, cols - 1] - u[i0] - v[cols]
            better = cur < minv[cols]
            minv[cols[better]] = cur[better]
            way[cols[better]] = j0
            j1 = cols[np.argmin(minv[cols])]
            delta = minv[j1]
            u[match[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1
    perm = np.empty(k, dtype=int)
    for j in range(1, k + 1):
        perm[match[j] - 1] = j - 1
    return perm


def _contingency(c, y):
    c = np.asarray(c)
    y = np.asarray(y)
    if c.shape != y.shape or c.ndim != 1:
        raise InvalidInputError("label vectors must be 1-D with equal length")
    _, ci = np.unique(c, return_inverse=True)
    _, yi = np.unique(y, return_inverse=True)
    M = np.zeros((ci.max() + 1, yi.max() + 1))
    np.add.at(M, (ci, yi), 1.0)
    return M


def clustering_acc(c, y):
    """Fraction of samples whose cluster maps to their class under the best one-to-one map."""
    M = _contingency(c, y)
    k = max(M.shape)
    square = np.zeros((k, k))
    square[:M.shape[0], :M.shape[1]] = M
    perm = hungarian(-square)
    return float(square[np.arange(k), perm].sum() / M.sum())


def _entropy(counts):
    p = counts[counts > 0] / counts.sum()
    return float(-np.sum(p * np.log(p)))


def nmi(c, y):
    """``MI(c, y) / max(H(c), H(y))`` in nats.

    Undefined (both partitions constant) gives ``nan``.
    """
    M = _contingency(c, y)
    n = M.sum()
    hc = _entropy(M.sum(axis=1))
    hy = _entropy(M.sum(axis=0))
    denom = max(hc, hy)
    if denom == 0.0:
        return float("nan")
    P = M / n
    outer = np.outer(P.sum(axis=1), P.sum(axis=0))
    nz = P > 0
    mi = float(np.sum(P[nz] * np.log(P[nz] / outer[nz])))
    return float(min(1.0, max(0.0, mi / denom)))


def clustering_eval(X_sel, y, k=None, runs=20, base_seed=0, max_iter=300):
    """k-means ``runs`` times (seeds ``base_seed + r``); mean ACC and NMI."""
    X_sel = as_matrix(X_sel)
    y = np.asarray(y)
    k = int(np.unique(y).size) if k is None else k
    acc, nm = [], []
    for r in range(runs):
        run = kmeans(X_sel, k, seed=base_seed + r, max_iter=max_iter)
        acc.append(clustering_acc(run.labels, y))
        nm.append(nmi(run.labels, y))
    return float(np.mean(acc)), float(np.mean(nm)), {"acc": acc, "nmi": nm}


def classify_cv(X_sel, y, folds=5, seed=0, hidden=100, epochs=200, batch_size=32,
                learning_rate=1e-3):
    """Stratified k-fold accuracy of an ``m -> hidden (ReLU) -> softmax`` MLP."""
    X_sel = as_matrix(X_sel)
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (X_sel.shape[0],):
        raise InvalidInputError("labels must match the number of samples")
    c = int(y.max()) + 1
    plan = stratified_kfold(y, folds, seed)
    T = one_hot(y, c)
    accs = []
    for f, (tr, te) in enumerate(plan):
        missing = np.setdiff1d(np.arange(c), y[tr])
        if missing.size:
            raise InvalidInputError(f"class(es) {missing.tolist()} absent from training fold {f}")
        net = DenseNet((X_sel.shape[1], hidden, c), output="softmax", seed=seed + f)
        cfg = TrainConfig(epochs=epochs, batch_size=batch_size, learning_rate=learning_rate,
                          seed=seed + f)
        net, _ = train(net, X_sel[tr], T[tr], loss="softmax_ce", cfg=cfg)
        pred = np.argmax(net.predict(X_sel[te]), axis=1)
        accs.append(float(np.mean(pred == y[te])))
    return float(np.mean(accs)), accs


def reconstruct_cv(X_sel, X_full, folds=5, seed=0, hidden=10, epochs=200, batch_size=32,
                   learning_rate=1e-3):
    """k-fold held-out MSE of reconstructing ``X_full`` from ``X_sel``.

    The MSE of a fold averages the squared error over its samples and all
    ``d`` output features.
    """
    X_sel = as_matrix(X_sel)
    X_full = as_matrix(X_full, "X_full")
    if X_sel.shape[0] != X_full.shape[0]:
        raise InvalidInputError("X_sel and X_full must have the same rows")
    plan = kfold(X_sel.shape[0], folds, seed)
    errs = []
    for f, (tr, te) in enumerate(plan):
        net = DenseNet((X_sel.shape[1], hidden, X_full.shape[1]), seed=seed + f)
        cfg = TrainConfig(epochs=epochs, batch_size=batch_size, learning_rate=learning_rate,
                          seed=seed + f)
        net, _ = train(net, X_sel[tr], X_full[tr], loss="squared_error", cfg=cfg)
        R = net.predict(X_sel[te]) - X_full[te]
        errs.append(float(np.mean(R * R)))
    return float(np.mean(errs)), errs


CSV_FIELDS = ("dataset", "method", "teacher", "p", "acc", "nmi", "clf_acc", "mse", "seed")


@dataclass
class MetricReport:
    """Means and per-run/per-fold breakdowns for one selected subset."""

    p: float
    dataset: str = ""
    method: str = ""
    teacher: str | None = None
    seed: int = 0
    acc_mean: float | None = None
    nmi_mean: float | None = None
    classification_accuracy_mean: float | None = None
    reconstruction_mse_mean: float | None = None
    breakdown: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "dataset": self.dataset, "method": self.method, "teacher": self.teacher,
            "p": self.p, "seed": self.seed,
            "acc_mean": self.acc_mean, "nmi_mean": self.nmi_mean,
            "classification_accuracy_mean": self.classification_accuracy_mean,
            "reconstruction_mse_mean": self.reconstruction_mse_mean,
            "breakdown": self.breakdown,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def csv_row(self):
        def fmt(v):
            return "" if v is None else repr(float(v))
        return {"dataset": self.dataset, "method": self.method, "teacher": self.teacher or "",
                "p": repr(float(self.p)), "acc": fmt(self.acc_mean), "nmi": fmt(self.nmi_mean),
                "clf_acc": fmt(self.classification_accuracy_mean),
                "mse": fmt(self.reconstruction_mse_mean), "seed": str(self.seed)}

    def to_csv(self, header=True):
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        if header:
            w.writeheader()
        w.writerow(self.csv_row())
        return buf.getvalue()


def evaluate(ds, selected, p, metrics=("clustering", "classification", "reconstruction"),
             seed=0, runs=20, folds=5, epochs=200, method="", teacher=None):
    """Run the requested metrics on ``ds`` restricted to ``selected`` columns."""
    selected = np.asarray(selected, dtype=int)
    X_sel = ds.X[:, selected]
    report = MetricReport(p=p, dataset=ds.name, method=method, teacher=teacher, seed=seed)
    needs_labels = {"clustering", "classification"} & set(metrics)
    if needs_labels and ds.labels is None:
        raise InvalidInputError(f"{sorted(needs_labels)} need class labels")
    if "clustering" in metrics:
        report.acc_mean, report.nmi_mean, bd = clustering_eval(
            X_sel, ds.labels, runs=runs, base_seed=seed)
        report.breakdown.update(bd)
    if "classification" in metrics:
        report.classification_accuracy_mean, per = classify_cv(
            X_sel, ds.labels, folds=folds, seed=seed, epochs=epochs)
        report.breakdown["clf_acc"] = per
    if "reconstruction" in metrics:
        report.reconstruction_mse_mean, per = reconstruct_cv(
            X_sel, ds.X, folds=folds, seed=seed, epochs=epochs)
        report.breakdown["mse"] = per
    return report
