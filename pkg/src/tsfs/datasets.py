"""Dataset containers, file loaders, scaling, fold plans and planted data."""

from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import InvalidInputError, ParseError
from .linalg import as_matrix

__all__ = [
    "Dataset",
    "FoldPlan",
    "PlantedSpec",
    "load_csv",
    "load_whitespace",
    "save_csv",
    "minmax_scale",
    "standardize",
    "stratified_subsample",
    "kfold",
    "stratified_kfold",
    "make_planted",
]


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """Data matrix with optional integer labels and feature names.

    Labels are integers in ``[0, c)`` with every class present at least once;
    ``class_names`` keeps the original label strings in class order.
    """

    X: np.ndarray
    labels: np.ndarray | None = None
    feature_names: tuple | None = None
    name: str = "dataset"
    class_names: tuple | None = None

    def __post_init__(self):
        X = as_matrix(self.X)
        n, d = X.shape
        if n < 2 or d < 2:
            raise InvalidInputError(f"a dataset needs n >= 2 and d >= 2, got {X.shape}")
        object.__setattr__(self, "X", _frozen(X))
        if self.labels is not None:
            y = np.asarray(self.labels)
            if y.shape != (n,) or not np.issubdtype(y.dtype, np.integer):
                raise InvalidInputError(f"labels must be {n} integers")
            c = int(y.max()) + 1 if n else 0
            if y.min() < 0 or np.unique(y).size != c:
                raise InvalidInputError("labels must cover every class in [0, c)")
            object.__setattr__(self, "labels", _frozen(y.astype(np.int64)))
        if self.feature_names is not None:
            names = tuple(str(s) for s in self.feature_names)
            if len(names) != d:
                raise InvalidInputError(f"expected {d} feature names, got {len(names)}")
            object.__setattr__(self, "feature_names", names)

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def d(self):
        return self.X.shape[1]

    @property
    def n_classes(self):
        return 0 if self.labels is None else int(self.labels.max()) + 1

    def subset(self, features):
        """Dataset restricted to the given feature columns."""
        features = np.asarray(features, dtype=int)
        names = None
        if self.feature_names is not None:
            names = tuple(self.feature_names[i] for i in features)
        return replace(self, X=self.X[:, features], feature_names=names)


def _encode_labels(raw):
    mapping = {}
    codes = []
    for v in raw:
        codes.append(mapping.setdefault(v, len(mapping)))
    return np.array(codes, dtype=np.int64), tuple(mapping)


def _parse_float(cell, row, col):
    try:
        value = float(cell)
    except ValueError:
        raise ParseError(f"cannot parse {cell!r} as a number", row=row, column=col) from None
    if not np.isfinite(value):
        raise ParseError(f"non-finite value {cell!r}", row=row, column=col)
    return value


def _looks_numeric(cell):
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, label_column=None, has_header="auto", name=None):
    """Read a comma-separated numeric table.

    ``label_column`` may be a header name (requires a header) or a 0-based
    column index. Label strings are mapped to integers in order of first
    appearance. With ``has_header="auto"`` the first row is a header when a
    named label column is requested or any of its feature cells is not a
    number.
    """
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if has_header == "auto":
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            has_header = True
        elif rows:
            skip = None if label_column is None else int(label_column) % len(rows[0])
            has_header = not all(_looks_numeric(c.strip())
                                 for j, c in enumerate(rows[0]) if j != skip)
        else:
            has_header = False
    header = None
    first_row = 1
    if has_header and rows:
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
        first_row = 2
    if not rows:
        raise ParseError(f"{path} contains no data rows")
    width = len(header) if header is not None else len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ParseError(f"expected {width} cells, found {len(r)}", row=first_row + i)

    label_idx = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if header is None:
                raise InvalidInputError("a named label column needs a header row")
            if label_column not in header:
                raise InvalidInputError(f"label column {label_column!r} not in header")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column) % width

    feature_cols = [j for j in range(width) if j != label_idx]
    X = np.empty((len(rows), len(feature_cols)))
    for i, r in enumerate(rows):
        for jj, j in enumerate(feature_cols):
            X[i, jj] = _parse_float(r[j].strip(), first_row + i, j + 1)

    labels = class_names = None
    if label_idx is not None:
        labels, class_names = _encode_labels([r[label_idx].strip() for r in rows])
    names = None if header is None else [header[j] for j in feature_cols]
    return Dataset(X=X, labels=labels, feature_names=names, name=name or path.stem,
                   class_names=class_names)


def load_whitespace(matrix_path, labels_path=None, name=None):
    """Read a whitespace-delimited matrix and an optional one-label-per-line file."""
    matrix_path = Path(matrix_path)
    rows = []
    with open(matrix_path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            cells = line.split()
            if not cells:
                continue
            if rows and len(cells) != len(rows[0][1]):
                raise ParseError(f"expected {len(rows[0][1])} cells, found {len(cells)}",
                                 row=lineno)
            rows.append((lineno, cells))
    if not rows:
        raise ParseError(f"{matrix_path} contains no data rows")
    X = np.array([[_parse_float(c, ln, j + 1) for j, c in enumerate(cells)] for ln, cells in rows])
    labels = class_names = None
    if labels_path is not None:
        with open(labels_path, encoding="utf-8") as fh:
            raw = [line.strip() for line in fh if line.strip()]
        if len(raw) != X.shape[0]:
            raise ParseError(f"{len(raw)} labels for {X.shape[0]} rows in {labels_path}")
        labels, class_names = _encode_labels(raw)
    return Dataset(X=X, labels=labels, name=name or matrix_path.stem, class_names=class_names)


def save_csv(ds, path, label_column="label"):
    """Write a dataset as CSV with a header row; labels go in the last column."""
    names = ds.feature_names or tuple(f"f{j}" for j in range(ds.d))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + ([label_column] if ds.labels is not None else []))
        for i in range(ds.n):
            row = [repr(float(v)) for v in ds.X[i]]
            if ds.labels is not None:
                cls = ds.labels[i]
                row.append(ds.class_names[cls] if ds.class_names else str(cls))
            w.writerow(row)


def minmax_scale(ds):
    """Map every feature column onto [0, 1]; constant columns become 0."""
    X = ds.X
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    safe = np.where(span > 0, span, 1.0)
    Xs = np.where(span > 0, (X - lo) / safe, 0.0)
    # keep the endpoints exact so a second pass is a no-op
    Xs = np.clip(Xs, 0.0, 1.0)
    return replace(ds, X=Xs)


def standardize(ds):
    """Zero-mean, unit-variance columns (1/n variance); constant columns become 0."""
    X = ds.X
    sd = X.std(axis=0)
    Xs = np.where(sd > 0, (X - X.mean(axis=0)) / np.where(sd > 0, sd, 1.0), 0.0)
    return replace(ds, X=Xs)


def stratified_subsample(ds, per_class, seed=0):
    """Keep at most ``per_class`` seeded random samples from every class."""
    if ds.labels is None:
        raise InvalidInputError("stratified subsampling needs labels")
    rng = np.random.default_rng(seed)
    keep = []
    for c in range(ds.n_classes):
        idx = np.flatnonzero(ds.labels == c)
        keep.append(np.sort(rng.permutation(idx)[:per_class]))
    keep = np.sort(np.concatenate(keep))
    return replace(ds, X=ds.X[keep], labels=ds.labels[keep])


@dataclass(frozen=True)
class FoldPlan:
    """Assignment of ``n`` samples to ``folds`` cross-validation folds."""

    n: int
    folds: int
    assignment: np.ndarray
    seed: int

    def split(self, fold):
        """Train and test indices for one fold."""
        test = self.assignment == fold
        return np.flatnonzero(~test), np.flatnonzero(test)

    def __iter__(self):
        for f in range(self.folds):
            yield self.split(f)

    def sizes(self):
        return np.bincount(self.assignment, minlength=self.folds)


def kfold(n, folds, seed=0):
    """Seeded permutation of ``range(n)`` dealt round-robin into folds."""
    if not 2 <= folds <= n:
        raise InvalidInputError(f"need 2 <= folds <= n, got folds={folds}, n={n}")
    perm = np.random.default_rng(seed).permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    assignment[perm] = np.arange(n) % folds
    return FoldPlan(n=n, folds=folds, assignment=_frozen(assignment), seed=seed)


def stratified_kfold(labels, folds, seed=0):
    """Fold plan dealing each class round-robin, continuing where the last class stopped."""
    labels = np.asarray(labels)
    n = labels.size
    if not 2 <= folds <= n:
        raise InvalidInputError(f"need 2 <= folds <= n, got folds={folds}, n={n}")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        assignment[idx] = (offset + np.arange(idx.size)) % folds
        offset += idx.size
    return FoldPlan(n=n, folds=folds, assignment=_frozen(assignment), seed=seed)


@dataclass(frozen=True)
class PlantedSpec:
    """Recipe for a synthetic dataset with known informative features.

    Labels are the angular sector (``n_classes`` equal wedges) of the latent
    2-D signal, so they depend on the informative features only.
    """

    n: int = 300
    d: int = 50
    k_informative: int = 4
    noise_sigma: float = 0.1
    structure: str = "linear"
    seed: int = 0
    n_classes: int = 4
    signal_scale: float = 3.0

    def __post_init__(self):
        if not 0 <= self.k_informative < self.d:
            raise InvalidInputError("k_informative must satisfy 0 <= k < d")
        if self.noise_sigma < 0:
            raise InvalidInputError("noise_sigma must be >= 0")
        if self.structure not in ("linear", "nonlinear"):
            raise InvalidInputError(f"unknown structure {self.structure!r}")
        if self.n_classes < 2:
            raise InvalidInputError("n_classes must be >= 2")


def make_planted(spec, return_latent=False):
    """Generate a planted dataset.

    Returns
    -------
    ds : Dataset
    informative : ndarray
        Sorted indices of the informative columns.
    Z : ndarray
        The (n, 2) latent signal, only when ``return_latent`` is set.
    """
    rng = np.random.default_rng(spec.seed)
    n, d, k = spec.n, spec.d, spec.k_informative
    Z = rng.standard_normal((n, 2))
    X = rng.standard_normal((n, d))
    informative = np.sort(rng.choice(d, size=k, replace=False))
    if k:
        # random unit directions: every informative column carries equal signal
        theta = rng.uniform(0.0, np.pi, size=k)
        A = np.vstack([np.cos(theta), np.sin(theta)])
        U = Z @ A
        if spec.structure == "linear":
            S = U
        else:
            # alternate sin and square maps; both are smooth and non-monotone
            S = np.where(np.arange(k) % 2 == 0, 2.0 * np.sin(U), U * U - np.mean(U * U, axis=0))
        X[:, informative] = spec.signal_scale * S + spec.noise_sigma * rng.standard_normal((n, k))
    angle = np.arctan2(Z[:, 1], Z[:, 0]) + np.pi
    labels = np.minimum((angle / (2 * np.pi) * spec.n_classes).astype(np.int64), spec.n_classes - 1)
    # relabel by first appearance so every class in [0, c) is present
    labels, _ = _encode_labels(labels.tolist())
    ds = Dataset(X=X, labels=labels, name=f"planted-{spec.structure}-{spec.seed}")
    if return_latent:
        return ds, informative, Z
    return ds, informative
