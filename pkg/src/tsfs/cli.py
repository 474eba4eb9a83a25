"""``tsfs`` command line: select, evaluate, benchmark, sensitivity.

Exit codes: 0 success, 2 usage / invalid input, 3 data errors, 4 numerical
failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .baselines import BASELINES
from .datasets import load_csv, load_whitespace, minmax_scale, standardize, stratified_subsample
from .errors import (ConnectivityError, InvalidInputError, NumericalError, ParseError,
                     TSFSError)
from .evaluation import classify_cv, evaluate
from .neural import TrainConfig, save_net
from .student import SelectionResult, StudentConfig, run_tsfs
from .teacher import TeacherSpec, fit_teacher

log = logging.getLogger("tsfs")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
OUTPUT_ENV = "TSFS_OUTPUT_DIR"
DEFAULT_PERCENTAGES = (2, 5, 10, 20, 30, 40, 50)


class StageError(Exception):
    """Wraps a failure with the pipeline stage it happened in."""

    def __init__(self, stage, error):
        super().__init__(f"{stage} stage: {error}")
        self.stage = stage
        self.error = error


def _exit_code(err):
    if isinstance(err, StageError):
        err = err.error
    if isinstance(err, NumericalError):
        return EXIT_NUMERIC
    if isinstance(err, (ParseError, ConnectivityError, FileNotFoundError, OSError)):
        return EXIT_DATA
    if isinstance(err, (InvalidInputError, ValueError)):
        return EXIT_USAGE
    return EXIT_DATA


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (TSFSError, OSError, ValueError, ArithmeticError) as err:
        raise StageError(name, err) from err


def parse_int_list(text):
    """``"1,2,5"``, ``"0-9"`` (inclusive range) or a mix of both; non-negative."""
    out = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        lo, sep, hi = part.partition("-")
        out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    return out


def parse_float_list(text):
    return [float(p) for p in str(text).split(",") if p.strip()]


# ---------------------------------------------------------------------------
# shared option groups

def _add_data_args(p):
    g = p.add_argument_group("data")
    g.add_argument("--input", required=True, help="CSV file or whitespace-delimited matrix")
    g.add_argument("--label-column", default=None,
                   help="label column name or 0-based index (CSV input)")
    g.add_argument("--labels-file", default=None,
                   help="one label per line (whitespace-delimited input)")
    g.add_argument("--format", choices=("auto", "csv", "whitespace"), default="auto")
    g.add_argument("--header", choices=("auto", "yes", "no"), default="auto")
    g.add_argument("--scale", choices=("none", "minmax", "standardize"), default="none",
                   help="feature scaling applied before anything else")
    g.add_argument("--subsample-per-class", type=int, default=None,
                   help="keep at most N seeded samples per class")


def _add_method_args(p):
    g = p.add_argument_group("method")
    g.add_argument("--method", default="tsfs", choices=("tsfs",) + tuple(BASELINES))
    g.add_argument("--teacher", default="tsne",
                   choices=("pca", "mds", "isomap", "lle", "spectral", "tsne", "supervised-mlp",
                            "supervised_mlp"))
    g.add_argument("--embed-dim", type=int, default=2)
    g.add_argument("--k-neighbors", type=int, default=None,
                   help="neighbours for isomap/lle/spectral teachers and the Laplacian Score")
    g.add_argument("--heat-t", type=float, default=None)
    g.add_argument("--lle-reg", type=float, default=None)
    g.add_argument("--perplexity", type=float, default=None)
    g.add_argument("--tsne-iters", type=int, default=None)
    g.add_argument("--tsne-lr", type=float, default=None)
    g.add_argument("--teacher-hidden", default=None,
                   help="comma-separated hidden widths of the supervised teacher")
    g.add_argument("--teacher-epochs", type=int, default=None)
    g.add_argument("--lambda", dest="lam", type=float, default=0.1)
    g.add_argument("--hidden", type=int, default=20)
    g.add_argument("--epochs", type=int, default=500)
    g.add_argument("--batch", type=int, default=32)
    g.add_argument("--lr", type=float, default=1e-3)
    g.add_argument("--rsr-lambda", type=float, default=100.0)
    g.add_argument("--aefs-lambda", type=float, default=1.0)
    g.add_argument("--aefs-beta", type=float, default=1e-4)
    g.add_argument("--aefs-hidden", type=int, default=16)


def _default_out():
    return os.environ.get(OUTPUT_ENV, ".")


def load_dataset(args, seed=0):
    fmt = args.format
    if fmt == "auto":
        fmt = "whitespace" if Path(args.input).suffix.lower() in (".txt", ".dat", ".tsv") else "csv"
    header = {"auto": "auto", "yes": True, "no": False}[args.header]
    if fmt == "csv":
        ds = load_csv(args.input, label_column=args.label_column, has_header=header)
    else:
        ds = load_whitespace(args.input, labels_path=args.labels_file)
    if args.subsample_per_class:
        ds = stratified_subsample(ds, args.subsample_per_class, seed=seed)
    if args.scale == "minmax":
        ds = minmax_scale(ds)
    elif args.scale == "standardize":
        ds = standardize(ds)
    return ds


def teacher_spec(args, seed):
    method = args.teacher.replace("-", "_")
    params = {}
    if method in ("isomap", "lle", "spectral") and args.k_neighbors is not None:
        params["k_neighbors"] = args.k_neighbors
    if method == "spectral" and args.heat_t is not None:
        params["heat_t"] = args.heat_t
    if method == "lle" and args.lle_reg is not None:
        params["reg"] = args.lle_reg
    if method == "tsne":
        if args.perplexity is not None:
            params["perplexity"] = args.perplexity
        if args.tsne_iters is not None:
            params["iterations"] = args.tsne_iters
        if args.tsne_lr is not None:
            params["learning_rate"] = args.tsne_lr
    if method == "supervised_mlp":
        if args.teacher_hidden:
            params["hidden_sizes"] = tuple(parse_int_list(args.teacher_hidden))
        if args.teacher_epochs is not None:
            params["epochs"] = args.teacher_epochs
    return TeacherSpec(method, args.embed_dim, seed, params)


def student_config(args, seed, lam=None):
    return StudentConfig(hidden=args.hidden, lam=args.lam if lam is None else lam,
                         epochs=args.epochs, batch_size=args.batch, learning_rate=args.lr,
                         seed=seed)


def baseline_kwargs(args, method, seed):
    if method == "laplacian_score":
        return {"k_neighbors": args.k_neighbors or 5}
    if method == "rsr":
        return {"lam": args.rsr_lambda}
    if method == "aefs":
        cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch, learning_rate=args.lr,
                          seed=seed)
        return {"lam": args.aefs_lambda, "beta": args.aefs_beta, "hidden": args.aefs_hidden,
                "cfg": cfg}
    return {}


def rank_features(ds, args, method, seed, teacher_cache=None, stats=None):
    """Scores and full ranking for one (method, seed); percentages slice it later."""
    if method == "tsfs":
        spec = teacher_spec(args, seed)
        if spec.supervised and ds.labels is None:
            raise StageError("teacher", InvalidInputError(
                "--teacher supervised-mlp needs labels; pass --label-column or --labels-file"))
        key = spec.key()
        if teacher_cache is not None and key in teacher_cache:
            emb = teacher_cache[key]
            if stats is not None:
                stats["teacher_cache_hits"] += 1
            log.info("teacher cache hit: %s seed=%d", spec.method, seed)
        else:
            emb = _stage("teacher", fit_teacher, ds, spec)
            if teacher_cache is not None:
                teacher_cache[key] = emb
            if stats is not None:
                stats["teacher_fits"] += 1
            log.info("teacher fit: %s seed=%d", spec.method, seed)
        return _stage("student", run_tsfs, ds, spec, 100, student_config(args, seed),
                      embedding=emb)
    kwargs = baseline_kwargs(args, method, seed)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = _stage(method, BASELINES[method], ds.X, seed=seed, **kwargs)
    return res.to_selection(100, seeds={"method": seed})


# ---------------------------------------------------------------------------
# select

def cmd_select(args):
    ds = _stage("load", load_dataset, args, args.seed)
    out = Path(args.out or _default_out())
    full = rank_features(ds, args, args.method, args.seed)
    sel = full.with_percent(args.percent)
    out.mkdir(parents=True, exist_ok=True)
    sel.save(out / "selection.json")
    sel.save_indices(out / "selected.txt")
    if args.save_embedding and "embedding" in full.meta:
        full.meta["embedding"].save_csv(out / "embedding.csv")
    if args.save_model and "model" in full.meta:
        save_net(full.meta["model"], out / "student.bin")
    names = ds.feature_names
    print(f"{sel.method} ({sel.teacher or '-'}): kept m={sel.m} of d={ds.d} features (p={sel.p})")
    print("rank  index  score         name")
    for r, i in enumerate(sel.ranking[:10]):
        label = names[i] if names else f"f{i}"
        print(f"{r + 1:>4}  {i:>5}  {sel.scores[i]:<12.6g}  {label}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# evaluate

def cmd_evaluate(args):
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = set(metrics) - {"clustering", "classification", "reconstruction"}
    if unknown:
        raise StageError("arguments", InvalidInputError(f"unknown metrics {sorted(unknown)}"))
    sel = _stage("load", SelectionResult.load, args.selection)
    ds = _stage("load", load_dataset, args, args.seed)
    if {"clustering", "classification"} & set(metrics) and ds.labels is None:
        raise StageError("arguments", InvalidInputError(
            "clustering/classification need labels; pass --label-column or --labels-file"))
    if sel.scores.size != ds.d:
        raise StageError("load", ParseError(
            f"selection covers {sel.scores.size} features but the data has {ds.d}"))
    if args.percent is not None:
        sel = sel.with_percent(args.percent)
    report = _stage("evaluation", evaluate, ds, sel.selected, sel.p, metrics=metrics,
                    seed=args.seed, runs=args.runs, folds=args.folds, epochs=args.eval_epochs,
                    method=sel.method, teacher=sel.teacher)
    out = Path(args.out or _default_out())
    out.mkdir(parents=True, exist_ok=True)
    (out / "metrics.json").write_text(report.to_json(), encoding="utf-8")
    (out / "metrics.csv").write_text(report.to_csv(), encoding="utf-8")
    print(report.to_csv(), end="")
    return EXIT_OK


# ---------------------------------------------------------------------------
# benchmark

BENCH_DEFAULTS = {
    "label_column": None, "labels_file": None, "format": "auto", "header": "auto",
    "scale": "none", "subsample_per_class": None,
    "methods": ["tsfs"], "percentages": list(DEFAULT_PERCENTAGES), "seeds": [0],
    "metrics": ["clustering", "classification", "reconstruction"],
    "teacher": "tsne", "embed_dim": 2, "k_neighbors": None, "heat_t": None, "lle_reg": None,
    "perplexity": None, "tsne_iters": None, "tsne_lr": None, "teacher_hidden": None,
    "teacher_epochs": None, "lam": 0.1, "hidden": 20, "epochs": 500, "batch": 32, "lr": 1e-3,
    "rsr_lambda": 100.0, "aefs_lambda": 1.0, "aefs_beta": 1e-4, "aefs_hidden": 16,
    "runs": 20, "folds": 5, "eval_epochs": 200, "workers": 1, "out": None,
}
_LIST_KEYS = {"methods": str, "percentages": float, "seeds": int, "metrics": str}


def load_bench_config(path):
    """JSON object or flat ``key = value`` lines (``#`` comments, lists comma-separated)."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError:
        raw = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError("expected key = value", row=lineno)
            k, v = (s.strip() for s in line.split("=", 1))
            raw[k] = v
    if not isinstance(raw, dict):
        raise ParseError("benchmark config must be an object")
    cfg = dict(BENCH_DEFAULTS)
    for k, v in raw.items():
        k = {"lambda": "lam"}.get(k.replace("-", "_"), k.replace("-", "_"))
        if k not in cfg and k != "input":
            raise InvalidInputError(f"unknown benchmark key {k!r}")
        if k in _LIST_KEYS:
            if isinstance(v, str):
                v = (parse_int_list(v) if k == "seeds"
                     else [s.strip() for s in v.split(",") if s.strip()])
            v = [_LIST_KEYS[k](x) for x in v]
        elif (k in BENCH_DEFAULTS and isinstance(v, str)
              and isinstance(BENCH_DEFAULTS[k], (int, float))
              and not isinstance(BENCH_DEFAULTS[k], bool)):
            v = type(BENCH_DEFAULTS[k])(v)
        cfg[k] = v
    if "input" not in cfg:
        raise InvalidInputError("benchmark config needs an 'input' key")
    if not cfg["seeds"]:
        raise InvalidInputError("benchmark config needs at least one seed")
    for p in cfg["percentages"]:
        if not 0 < p <= 100:
            raise InvalidInputError(f"percentage {p} outside (0, 100]")
    for m in cfg["methods"]:
        base = m.split(":", 1)[0]
        if base != "tsfs" and base not in BASELINES:
            raise InvalidInputError(f"unknown method {m!r}")
    return cfg


# rankings counts (method, seed) score computations; ranking_slices counts the
# percentage cells served from them without recomputation.
STAT_KEYS = ("teacher_fits", "teacher_cache_hits", "rankings", "ranking_slices")


def _method_label(method, teacher):
    return method if method != "tsfs" else f"tsfs:{teacher}"


def _bench_seed(cfg, seed):
    """All (method, percentage) cells for one seed; teacher fits shared across methods."""
    args = argparse.Namespace(**cfg)
    ds = load_dataset(args, seed)
    cache = {}
    stats = dict.fromkeys(STAT_KEYS, 0)
    rows = []
    for method in cfg["methods"]:
        base, _, teacher = method.partition(":")
        margs = argparse.Namespace(**{**cfg, "teacher": teacher or cfg["teacher"]})
        tname = margs.teacher.replace("-", "_") if base == "tsfs" else ""
        label = _method_label(base, tname)
        try:
            full = rank_features(ds, margs, base, seed, teacher_cache=cache, stats=stats)
            stats["rankings"] += 1
        except Exception as err:  # recorded in-row; the sweep continues
            for p in cfg["percentages"]:
                rows.append({"dataset": ds.name, "method": label, "teacher": tname, "p": p,
                             "seed": seed, "error": str(err)})
            continue
        for p in cfg["percentages"]:
            sel = full.with_percent(p)
            stats["ranking_slices"] += 1
            row = {"dataset": ds.name, "method": label, "teacher": tname, "p": p, "seed": seed,
                   "m": sel.m}
            try:
                rep = evaluate(ds, sel.selected, p, metrics=cfg["metrics"], seed=seed,
                               runs=cfg["runs"], folds=cfg["folds"], epochs=cfg["eval_epochs"])
                row.update(acc=rep.acc_mean, nmi=rep.nmi_mean,
                           clf_acc=rep.classification_accuracy_mean,
                           mse=rep.reconstruction_mse_mean)
            except Exception as err:
                row["error"] = str(err)
            rows.append(row)
    return rows, stats


BENCH_FIELDS = ("dataset", "method", "teacher", "p", "m", "seed", "acc", "nmi", "clf_acc", "mse",
                "error")
SUMMARY_FIELDS = ("method", "p", "n", "acc", "nmi", "clf_acc", "mse")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def run_benchmark(cfg):
    """Run the (method x percentage x seed) sweep; returns rows, summary and counters."""
    seeds = cfg["seeds"]
    workers = int(cfg.get("workers") or 1)
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_bench_seed, [cfg] * len(seeds), seeds))
    else:
        results = [_bench_seed(cfg, s) for s in seeds]
    rows, stats = [], dict.fromkeys(STAT_KEYS, 0)
    for r, s in results:  # seed order keeps the output deterministic
        rows.extend(r)
        for k in stats:
            stats[k] += s[k]
    order = {m: i for i, m in enumerate(dict.fromkeys(r["method"] for r in rows))}
    rows.sort(key=lambda r: (order[r["method"]], r["p"], seeds.index(r["seed"])))
    summary = []
    for method in order:
        for p in cfg["percentages"]:
            cell = [r for r in rows if r["method"] == method and r["p"] == p and "error" not in r]
            entry = {"method": method, "p": p, "n": len(cell)}
            for key in ("acc", "nmi", "clf_acc", "mse"):
                vals = [r[key] for r in cell if r.get(key) is not None]
                entry[key] = float(np.mean(vals)) if vals else None
            summary.append(entry)
    log.info("teacher fits=%d cache hits=%d rankings=%d ranking slices=%d",
             stats["teacher_fits"], stats["teacher_cache_hits"], stats["rankings"],
             stats["ranking_slices"])
    return rows, summary, stats


def _write_csv(path, fields, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: _fmt(r.get(k)) for k in fields})


def cmd_benchmark(args):
    cfg = _stage("config", load_bench_config, args.config)
    if args.out:
        cfg["out"] = args.out
    if args.workers:
        cfg["workers"] = args.workers
    out = Path(cfg["out"] or _default_out())
    rows, summary, stats = run_benchmark(cfg)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "benchmark.csv", BENCH_FIELDS, rows)
    _write_csv(out / "summary.csv", SUMMARY_FIELDS, summary)
    (out / "benchmark_stats.json").write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n",
                                              encoding="utf-8")
    failed = sum("error" in r for r in rows)
    print(f"{len(rows)} cells, {failed} failed; teacher fits={stats['teacher_fits']} "
          f"cache hits={stats['teacher_cache_hits']} rankings={stats['rankings']}")
    for e in summary:
        print(f"{e['method']:<22} p={e['p']:<6g} " + "  ".join(
            f"{k}={e[k]:.4f}" for k in ("acc", "nmi", "clf_acc", "mse") if e[k] is not None))
    if rows and failed == len(rows):
        return EXIT_DATA
    return EXIT_OK


# ---------------------------------------------------------------------------
# sensitivity

def run_sensitivity(ds, args, lambdas, seeds):
    """Classification accuracy per (lambda, seed); one teacher fit per seed."""
    rows = []
    for seed in seeds:
        spec = teacher_spec(args, seed)
        if spec.supervised and ds.labels is None:
            raise StageError("teacher", InvalidInputError("--teacher supervised-mlp needs labels"))
        emb = _stage("teacher", fit_teacher, ds, spec)
        for lam in lambdas:
            sel = _stage("student", run_tsfs, ds, spec, args.percent,
                         student_config(args, seed, lam), embedding=emb)
            acc, _ = _stage("evaluation", classify_cv, ds.X[:, sel.selected], ds.labels,
                            folds=args.folds, seed=seed, epochs=args.eval_epochs)
            rows.append({"lambda": lam, "seed": seed, "clf_acc": acc})
    means = {lam: float(np.mean([r["clf_acc"] for r in rows if r["lambda"] == lam]))
             for lam in lambdas}
    spread = max(means.values()) - min(means.values())
    return rows, means, spread


def cmd_sensitivity(args):
    lambdas = parse_float_list(args.lambdas)
    seeds = parse_int_list(args.seeds)
    if not lambdas or not seeds:
        raise StageError("arguments", InvalidInputError("need at least one lambda and one seed"))
    ds = _stage("load", load_dataset, args, seeds[0])
    if ds.labels is None:
        raise StageError("arguments", InvalidInputError(
            "sensitivity reports classification accuracy; pass --label-column or --labels-file"))
    rows, means, spread = run_sensitivity(ds, args, lambdas, seeds)
    out = Path(args.out or _default_out())
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "sensitivity_runs.csv", ("lambda", "seed", "clf_acc"), rows)
    # wide table: one accuracy column per lambda, one row per seed plus the mean
    cols = [f"lambda={lam:g}" for lam in lambdas]
    wide = []
    for seed in seeds:
        acc = {r["lambda"]: r["clf_acc"] for r in rows if r["seed"] == seed}
        wide.append({"seed": seed, **{c: acc[lam] for c, lam in zip(cols, lambdas)}})
    wide.append({"seed": "mean", **{c: means[lam] for c, lam in zip(cols, lambdas)}})
    _write_csv(out / "sensitivity.csv", ["seed", *cols], wide)
    payload = {"lambdas": lambdas, "seeds": seeds, "percent": args.percent,
               "teacher": args.teacher.replace("-", "_"),
               "mean_clf_acc": [means[lam] for lam in lambdas], "spread": spread}
    (out / "sensitivity.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                                          encoding="utf-8")
    print("lambda      clf_acc")
    for lam in lambdas:
        print(f"{lam:<10g}  {means[lam]:.4f}")
    print(f"spread (max - min) = {spread:.4f}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(prog="tsfs", description="Teacher-student feature selection")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="rank features and keep the top percentage")
    _add_data_args(p)
    _add_method_args(p)
    p.add_argument("--percent", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help=f"output directory (default ${OUTPUT_ENV} or .)")
    p.add_argument("--save-embedding", action="store_true", help="also write embedding.csv")
    p.add_argument("--save-model", action="store_true", help="also write student.bin")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("evaluate", help="score a selection with the evaluation protocol")
    _add_data_args(p)
    p.add_argument("--selection", required=True, help="selection.json from `tsfs select`")
    p.add_argument("--metrics", default="clustering,classification,reconstruction")
    p.add_argument("--percent", type=float, default=None, help="re-slice the stored ranking")
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--eval-epochs", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("benchmark", help="method x percentage x seed sweep from a config file")
    p.add_argument("config", help="JSON or key=value config file")
    p.add_argument("--out", default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("sensitivity", help="classification accuracy across lambda values")
    _add_data_args(p)
    _add_method_args(p)
    p.add_argument("--lambdas", default="0.001,0.01,0.1")
    p.add_argument("--seeds", default="0-9")
    p.add_argument("--percent", type=float, default=20.0)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--eval-epochs", type=int, default=200)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sensitivity)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    if getattr(args, "percent", None) is not None and not 0 < args.percent <= 100:
        parser.error("--percent must lie in (0, 100]")
    try:
        return args.func(args)
    except (StageError, TSFSError, OSError) as err:
        print(f"tsfs {args.command}: {err}", file=sys.stderr)
        return _exit_code(err)


if __name__ == "__main__":
    sys.exit(main())
