"""Command-line interface: ``spmgm <command> ...``.

Commands
--------
cluster   cluster a matrix CSV or edge list, optionally scoring against truth
bench     benchmark sweep over mu, d_avg or n on generated graphs
score     NMI / ARS between two label files
bound     evaluate the maximum-gap recovery bound for a labeled graph
sim       build a similarity matrix from a feature CSV
gen       draw one benchmark graph and write LFR-style files
read-lfr  summarize (and optionally convert) an LFR network/community pair

Exit status is 0 on success, 2 for bad input or usage and 3 when an
algorithm fails on valid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .benchgen import BenchmarkSpec, generate, read_lfr, realized_mixing, write_lfr
from .clustering import LINKAGES, agglomerative, kmeans, sp_g1, sp_kmeans, sp_mgm
from .eigen import ZERO_TOL
from .errors import AlgorithmError, InputError, ParseError, SizeMismatch
from .graph import (
    SimilarityMatrix,
    read_edge_list,
    read_labels,
    read_matrix_csv,
    write_labels,
    write_matrix_csv,
)
from .metrics import scores
from .similarity import load_features_csv, gaussian_similarity, precision_similarity
from .theory import recovery_bound

log = logging.getLogger("spmgm")

ALGORITHMS = ("mgm", "g1", "spectral-kmeans", "kmeans", "agglomerative")
BENCH_DEFAULT_ALGORITHMS = ("mgm", "spectral-kmeans", "kmeans", "agglomerative")
AXES = ("mu", "d_avg", "n")
SCORE_KEYS = ("nmi", "ars", "mean")


class UsageError(InputError):
    pass


# ---------------------------------------------------------------------------
# helpers


def _dump_json(obj, dest) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def _write_text(text: str, dest) -> None:
    if dest is None or dest == "-":
        sys.stdout.write(text)
    else:
        Path(dest).write_text(text, encoding="utf-8")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    for row in rows:
        wr.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def load_graph(path, fmt: str = "auto") -> SimilarityMatrix:
    """Read a dense matrix CSV or a whitespace-separated edge list."""
    p = Path(path)
    if not p.is_file():
        raise ParseError("no such file", path)
    if fmt == "auto":
        fmt = "csv" if p.suffix.lower() == ".csv" else "edges"
    if fmt == "csv":
        return read_matrix_csv(p)
    if fmt == "edges":
        return read_edge_list(p)
    raise UsageError(f"unknown input format {fmt!r}")


def _load_labels(path):
    if not Path(path).is_file():
        raise ParseError("no such file", path)
    return read_labels(path)


def _warning_text(w) -> str:
    return f"{type(w.message).__name__}: {w.message}"


def _default_kind(algorithm: str, kind: str | None) -> str:
    if kind is not None:
        return kind
    return "unnormalized" if algorithm == "mgm" else "normalized"


def run_algorithm(a: SimilarityMatrix, algorithm: str, *, modes=None, clusters=None, kind=None,
                  seed=0, tol=ZERO_TOL, threshold="mean", linkage="average"):
    """Dispatch to one clustering routine; returns ``(clustering, parameters)``."""
    if algorithm == "mgm":
        if modes is None:
            raise UsageError("--modes is required for mgm")
        kind = _default_kind(algorithm, kind)
        return sp_mgm(a, modes, kind, tol), {"m": modes, "laplacian": kind}
    if algorithm == "g1":
        kind = _default_kind(algorithm, kind)
        return sp_g1(a, threshold, kind, tol), {"threshold": threshold, "laplacian": kind}
    if clusters is None:
        raise UsageError(f"--clusters is required for {algorithm}")
    if algorithm == "spectral-kmeans":
        kind = _default_kind(algorithm, kind)
        return sp_kmeans(a, clusters, seed=seed, kind=kind, zero_tol=tol), {
            "k": clusters, "laplacian": kind, "seed": seed}
    if algorithm == "kmeans":
        return kmeans(a.w, clusters, seed=seed), {"k": clusters, "seed": seed, "features": "adjacency-rows"}
    if algorithm == "agglomerative":
        return agglomerative(a.w, clusters, linkage), {
            "k": clusters, "linkage": linkage, "features": "adjacency-rows"}
    raise UsageError(f"unknown algorithm {algorithm!r}")


# ---------------------------------------------------------------------------
# cluster


def cmd_cluster(args) -> int:
    a = load_graph(args.input, args.input_format)
    log.info("loaded %s: %d nodes", args.input, a.n)
    truth = _load_labels(args.truth) if args.truth else None
    if truth is not None and truth.n != a.n:
        raise SizeMismatch(f"truth has {truth.n} labels, graph has {a.n} nodes")
    threshold = args.threshold
    try:
        threshold = float(threshold)
    except ValueError:
        pass
    t0 = time.perf_counter()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result, params = run_algorithm(
            a, args.algorithm, modes=args.modes, clusters=args.clusters, kind=args.laplacian,
            seed=args.seed, tol=args.tol, threshold=threshold, linkage=args.linkage)
    elapsed = time.perf_counter() - t0
    record = {
        "algorithm": args.algorithm,
        "parameters": params,
        "input": {"path": str(args.input), "n": a.n},
        "labels": result.tolist(),
        "n_clusters": result.k,
        "wall_time_s": elapsed if args.timing else None,
        "warnings": [_warning_text(w) for w in caught],
    }
    if truth is not None:
        record["scores"] = scores(truth, result)
    for w in caught:
        log.warning("%s", _warning_text(w))
    if args.format == "csv":
        _write_text(_csv_text(["node", "label"], enumerate(result.tolist())), args.output)
    else:
        _dump_json(record, args.output)
    return 0


# ---------------------------------------------------------------------------
# bench


def _run_cell(task):
    """One (axis value, seed) cell: generate, then run every algorithm."""
    spec_kwargs, value, seed, algorithms, kind, tol = task
    spec = BenchmarkSpec(**spec_kwargs)
    out = []
    try:
        g = generate(spec)
    except Exception as exc:
        for alg in algorithms:
            out.append(_run_record(value, seed, alg, None, None, [f"generation failed: {exc}"]))
        return out
    k = g.truth.k
    for alg in algorithms:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            try:
                res, _ = run_algorithm(g.graph, alg, modes=max(k - 1, 1), clusters=k,
                                       kind=kind, seed=seed, tol=tol)
            except Exception as exc:  # a failed run must never abort the sweep
                res = None
                caught.append(warnings.WarningMessage(
                    RuntimeWarning(f"{type(exc).__name__}: {exc}"), RuntimeWarning, "", 0))
        sc = scores(g.truth, res) if res is not None else None
        out.append(_run_record(value, seed, alg, sc, res.k if res is not None else None,
                               [_warning_text(w) for w in caught], true_k=k, n=g.graph.n))
    return out


def _run_record(value, seed, alg, sc, n_clusters, warns, true_k=None, n=None):
    return {
        "value": value,
        "seed": seed,
        "algorithm": alg,
        "nmi": sc["nmi"] if sc else None,
        "ars": sc["ars"] if sc else None,
        "mean": sc["mean"] if sc else None,
        "n_clusters": n_clusters,
        "true_k": true_k,
        "n_nodes": n,
        "warnings": warns,
    }


def _run_key(r):
    return (r["value"], r["algorithm"], r["seed"])


def summarize(axis: str, fixed: dict, runs: list[dict]) -> dict:
    """Aggregate per-run records into a sweep result (order independent)."""
    runs = sorted(runs, key=_run_key)
    values = sorted({r["value"] for r in runs})
    algorithms = sorted({r["algorithm"] for r in runs})
    seeds = sorted({r["seed"] for r in runs})
    summary = []
    for v in values:
        for alg in algorithms:
            cell = [r for r in runs if r["value"] == v and r["algorithm"] == alg]
            ok = [r for r in cell if r["mean"] is not None]
            row = {"value": v, "algorithm": alg, "n_runs": len(cell), "n_failed": len(cell) - len(ok)}
            for key in SCORE_KEYS:
                xs = np.array([r[key] for r in ok], dtype=np.float64)
                row[f"{key}_mean"] = float(xs.mean()) if xs.size else None
                row[f"{key}_std"] = float(xs.std()) if xs.size else None
            row["cluster_counts"] = [r["n_clusters"] for r in cell]
            if alg == "mgm":
                hits = [r["n_clusters"] == r["true_k"] for r in ok]
                row["m_plus_one_fraction"] = float(np.mean(hits)) if hits else None
            summary.append(row)
    return {
        "axis": axis,
        "values": values,
        "fixed": fixed,
        "seeds": seeds,
        "algorithms": algorithms,
        "summary": summary,
        "runs": runs,
        "warnings": [f"value={r['value']} seed={r['seed']} {r['algorithm']}: {w}"
                     for r in runs for w in r["warnings"] if r["mean"] is None],
    }


def sweep(axis: str, values, fixed: dict, seeds, algorithms, kind=None, tol=ZERO_TOL, jobs=1) -> dict:
    """Run the benchmark protocol and return the aggregated sweep."""
    if axis not in AXES:
        raise UsageError(f"axis must be one of {AXES}")
    tasks = []
    for v in values:
        kw = dict(fixed)
        kw[axis] = int(v) if axis == "n" else float(v)
        for s in seeds:
            tasks.append(({**kw, "seed": int(s)}, kw[axis], int(s), tuple(algorithms), kind, tol))
    log.info("running %d graphs x %d algorithms on %d worker(s)", len(tasks), len(algorithms), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            chunks = list(ex.map(_run_cell, tasks))
    else:
        chunks = [_run_cell(t) for t in tasks]
    runs = [r for chunk in chunks for r in chunk]
    return summarize(axis, fixed, runs)


def merge_sweeps(results: list[dict]) -> dict:
    """Combine sweeps over disjoint seeds (duplicates keep the first copy)."""
    if not results:
        raise UsageError("nothing to merge")
    axis, fixed = results[0]["axis"], results[0]["fixed"]
    seen = {}
    for res in results:
        if res["axis"] != axis or res["fixed"] != fixed:
            raise UsageError("can only merge sweeps with the same axis and fixed parameters")
        for r in res["runs"]:
            seen.setdefault(_run_key(r), r)
    return summarize(axis, fixed, list(seen.values()))


def sweep_table(result: dict) -> str:
    cols = ["value", "algorithm", "n_runs", "n_failed"] + [
        f"{k}_{s}" for k in SCORE_KEYS for s in ("mean", "std")]
    rows = [[row[c] for c in cols] for row in result["summary"]]
    return _csv_text([result["axis"]] + cols[1:], rows)


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def cmd_bench(args) -> int:
    if args.merge:
        loaded = []
        for p in args.merge:
            try:
                loaded.append(json.loads(Path(p).read_text(encoding="utf-8")))
            except (OSError, json.JSONDecodeError) as exc:
                raise ParseError(str(exc), p) from None
        result = merge_sweeps(loaded)
    else:
        values = _float_list(args.values)
        if not values:
            raise UsageError("--values is empty")
        if args.seeds < 1:
            raise UsageError("--seeds must be at least 1")
        algorithms = [t.strip() for t in args.algorithms.split(",") if t.strip()]
        bad = [a for a in algorithms if a not in ALGORITHMS]
        if bad or not algorithms:
            raise UsageError(f"unknown algorithm(s) {bad}; choose from {ALGORITHMS}")
        fixed = {"n": args.n, "d_avg": args.d_avg, "d_max": args.d_max, "mu": args.mu,
                 "tau1": args.tau1, "tau2": args.tau2,
                 "min_community": args.min_community, "max_community": args.max_community}
        # validate the fixed parameters before spawning any work
        for v in values:
            BenchmarkSpec(**{**fixed, args.axis: int(v) if args.axis == "n" else v})
        seeds = range(args.seed, args.seed + args.seeds)
        result = sweep(args.axis, values, fixed, seeds, algorithms, args.laplacian, args.tol, args.jobs)
    for w in result["warnings"]:
        log.warning("%s", w)
    if args.csv:
        Path(args.csv).write_text(sweep_table(result), encoding="utf-8")
    if args.format == "csv":
        _write_text(sweep_table(result), args.output)
    else:
        _dump_json(result, args.output)
    return 0


# ---------------------------------------------------------------------------
# score, bound, sim


def cmd_score(args) -> int:
    a, b = _load_labels(args.labels_a), _load_labels(args.labels_b)
    sc = scores(a, b)
    out = {**sc, "n": a.n}
    if args.format == "csv":
        _write_text(_csv_text(["nmi", "ars", "mean", "n"], [[sc["nmi"], sc["ars"], sc["mean"], a.n]]),
                    args.output)
    else:
        _dump_json(out, args.output)
    return 0


def cmd_bound(args) -> int:
    a = load_graph(args.input, args.input_format)
    truth = _load_labels(args.truth)
    report = recovery_bound(a, truth, args.tol)
    _dump_json(report.to_dict(), args.output)
    return 0


def cmd_sim(args) -> int:
    f = load_features_csv(args.features)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if args.kernel == "gaussian":
            a = gaussian_similarity(f, args.sigma)
        else:
            a = precision_similarity(f, args.sigma, args.metric)
    for w in caught:
        log.warning("%s", _warning_text(w))
    if args.output is None or args.output == "-":
        buf = io.StringIO()
        for row in a.w:
            buf.write(",".join(repr(float(x)) for x in row) + "\n")
        sys.stdout.write(buf.getvalue())
    else:
        write_matrix_csv(a, args.output)
    return 0


# ---------------------------------------------------------------------------
# gen, read-lfr


def cmd_gen(args) -> int:
    spec = BenchmarkSpec(
        n=args.n, d_avg=args.d_avg, d_max=args.d_max, mu=args.mu, tau1=args.tau1, tau2=args.tau2,
        seed=args.seed, intra_weight=args.intra_weight, inter_weight=args.inter_weight,
        weight_jitter=args.weight_jitter, min_community=args.min_community,
        max_community=args.max_community)
    g = generate(spec, retain_largest=not args.keep_all)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_lfr(g, out / "network.dat", out / "community.dat", out / "metadata.json")
    _dump_json(g.metadata, args.output)
    return 0


def cmd_read_lfr(args) -> int:
    g = read_lfr(args.network, args.community)
    summary = {
        "n": g.graph.n,
        "n_edges": int(np.count_nonzero(np.triu(g.graph.w, 1))),
        "n_communities": g.truth.k,
        "community_sizes": g.truth.sizes().tolist(),
        "realized_mu": realized_mixing(g) if g.graph.w.any() else None,
    }
    if args.matrix_out:
        write_matrix_csv(g.graph, args.matrix_out)
    if args.labels_out:
        write_labels(g.truth, args.labels_out)
    _dump_json(summary, args.output)
    return 0


# ---------------------------------------------------------------------------
# parser


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--laplacian", choices=("unnormalized", "normalized"), default=None,
                        help="Laplacian kind (default: unnormalized for mgm, normalized otherwise)")
    common.add_argument("--tol", type=_positive_float, default=ZERO_TOL,
                        help="relative tolerance for treating eigenvalues as zero (default 1e-9)")
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="output format")
    common.add_argument("-o", "--output", default=None, help="output file (default stdout)")
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = argparse.ArgumentParser(prog="spmgm", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    c = sub.add_parser("cluster", parents=[common], help="cluster a similarity matrix")
    c.add_argument("input", help="matrix CSV (.csv) or edge list (u v [w], 1-indexed)")
    c.add_argument("--input-format", choices=("auto", "csv", "edges"), default="auto")
    c.add_argument("--algorithm", choices=ALGORITHMS, default="mgm")
    c.add_argument("--modes", type=_positive_int, help="eigenmodes for mgm")
    c.add_argument("--clusters", type=_positive_int, help="cluster count for the other algorithms")
    c.add_argument("--threshold", default="mean", help="g1 threshold: mean, median, zero or a number")
    c.add_argument("--linkage", choices=LINKAGES, default="average")
    c.add_argument("--truth", help="labels file to score against")
    c.add_argument("--timing", action="store_true", help="record wall time (output no longer reproducible)")
    c.set_defaults(func=cmd_cluster)

    b = sub.add_parser("bench", parents=[common], help="benchmark sweep on generated graphs")
    b.add_argument("--axis", choices=AXES, default="mu")
    b.add_argument("--values", default="0.1,0.2,0.3,0.4,0.5", help="comma-separated axis values")
    b.add_argument("--seeds", type=int, default=50, help="number of graphs per value (seeds start at --seed)")
    b.add_argument("--algorithms", default=",".join(BENCH_DEFAULT_ALGORITHMS),
                   help=f"comma-separated subset of {','.join(ALGORITHMS)}")
    b.add_argument("--n", type=int, default=50)
    b.add_argument("--d-avg", type=float, default=5.0)
    b.add_argument("--d-max", type=float, default=20.0)
    b.add_argument("--mu", type=float, default=0.1)
    b.add_argument("--tau1", type=float, default=2.0)
    b.add_argument("--tau2", type=float, default=1.0)
    b.add_argument("--min-community", type=int, default=None)
    b.add_argument("--max-community", type=int, default=None)
    b.add_argument("--jobs", type=_positive_int, default=1, help="worker processes")
    b.add_argument("--csv", help="also write the summary table to this CSV file")
    b.add_argument("--merge", nargs="+", metavar="JSON",
                   help="merge previously written sweep results instead of running")
    b.set_defaults(func=cmd_bench)

    s = sub.add_parser("score", parents=[common], help="compare two label files")
    s.add_argument("labels_a")
    s.add_argument("labels_b")
    s.set_defaults(func=cmd_score)

    bd = sub.add_parser("bound", parents=[common], help="check the recovery bound")
    bd.add_argument("input", help="matrix CSV or edge list")
    bd.add_argument("truth", help="labels file")
    bd.add_argument("--input-format", choices=("auto", "csv", "edges"), default="auto")
    bd.set_defaults(func=cmd_bound)

    sm = sub.add_parser(
        "sim", parents=[common], help="similarity matrix from features",
        description="Features CSV: one sample per row. For the precision kernel, put the "
                    "per-feature variances in an optional first row starting with '#var', "
                    "e.g. '#var,0.5,2.0'.")
    sm.add_argument("features", help="feature CSV")
    sm.add_argument("--kernel", choices=("gaussian", "precision"), default="gaussian")
    sm.add_argument("--metric", choices=("inner", "mahalanobis-sq"), default="inner",
                    help="d_ij for the precision kernel")
    sm.add_argument("--sigma", type=_positive_float, required=True)
    sm.set_defaults(func=cmd_sim)

    g = sub.add_parser("gen", parents=[common], help="draw one benchmark graph")
    g.add_argument("--n", type=int, default=50)
    g.add_argument("--d-avg", type=float, default=5.0)
    g.add_argument("--d-max", type=float, default=20.0)
    g.add_argument("--mu", type=float, default=0.1)
    g.add_argument("--tau1", type=float, default=2.0)
    g.add_argument("--tau2", type=float, default=1.0)
    g.add_argument("--min-community", type=int, default=None)
    g.add_argument("--max-community", type=int, default=None)
    g.add_argument("--intra-weight", type=float, default=1.0)
    g.add_argument("--inter-weight", type=float, default=1.0)
    g.add_argument("--weight-jitter", type=float, default=0.0)
    g.add_argument("--keep-all", action="store_true", help="keep all components")
    g.add_argument("--out-dir", required=True)
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("read-lfr", parents=[common], help="load network.dat/community.dat")
    r.add_argument("network")
    r.add_argument("community")
    r.add_argument("--matrix-out", help="write the dense matrix CSV here")
    r.add_argument("--labels-out", help="write 0-based labels here")
    r.set_defaults(func=cmd_read_lfr)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(name)s: %(levelname)s: %(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"spmgm {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except AlgorithmError as exc:
        print(f"spmgm {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
