"""Command-line interface: one binary, one subcommand per pipeline.

Every run that writes files also writes a ``run.json`` echoing the fully
resolved configuration (defaults and seed included, no timestamps), and
every report is JSON with a ``schema_version`` field and numbers rendered
with 17 significant digits, so identical argv and seed produce
byte-identical outputs.  Exit codes: 0 success, 1 usage error, 2 data
error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import averaging, benchstats, clustering, data, filters, genmetrics
from .distances import DistanceConfig, dtw, euclidean, msm, shape_dtw, soft_dtw

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1
        raise UsageError(message)


def _render_json(obj, indent: int = 0) -> str:
    """Serialize to JSON with floats at 17 significant digits."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{inner}"{k}": {_render_json(v, indent + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if len(obj) == 0:
            return "[]"
        items = [f"{inner}{_render_json(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    if isinstance(obj, bool) or isinstance(obj, np.bool_):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g")
    return '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'


def write_json(obj, path: str) -> None:
    with open(path, "w") as fh:
        fh.write(_render_json(obj) + "\n")


def _write_run_config(outdir: str, subcommand: str, config: dict) -> None:
    os.makedirs(outdir, exist_ok=True)
    payload = {"schema_version": SCHEMA_VERSION, "subcommand": subcommand}
    payload.update(config)
    write_json(payload, os.path.join(outdir, "run.json"))


def _outdir_for(path_or_dir: str) -> str:
    if os.path.splitext(path_or_dir)[1]:
        return os.path.dirname(os.path.abspath(path_or_dir))
    return path_or_dir


def build_parser() -> _Parser:
    parser = _Parser(prog="warpbench", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("distance", help="elastic distance between two series files")
    p.add_argument("--kind", choices=["ed", "dtw", "softdtw", "msm", "shapedtw"], default="dtw")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--msm-cost", type=float, default=1.0)
    p.add_argument("--reach", type=int, default=15)
    p.add_argument("--path", action="store_true", help="also print the warping path as JSON")
    p.add_argument("-o", "--output", default=None, help="directory for distance.json + run.json")
    p.add_argument("series_a")
    p.add_argument("series_b")

    p = sub.add_parser("average", help="prototype a dataset")
    p.add_argument("--method", choices=["mean", "dba", "shapedba"], default="dba")
    p.add_argument("--reach", type=int, default=15)
    p.add_argument("--max-iters", type=int, default=averaging.DEFAULT_MAX_ITERS)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--seed", type=int, default=None, help="seeded random init (default: medoid)")
    p.add_argument("dataset")
    p.add_argument("-o", "--output", required=True, help="prototype series file")

    p = sub.add_parser("extend", help="double a scored dataset with weighted synthetics")
    p.add_argument("--neighbors", type=int, default=1)
    p.add_argument("--reach", type=int, default=15)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("dataset")
    p.add_argument("-o", "--output", required=True, help="extended dataset file")

    p = sub.add_parser("cluster", help="k-means with elastic barycenter averaging")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--distance", choices=["euclidean", "dtw", "shapedtw"], default="dtw")
    p.add_argument("--avg", choices=["mean", "dba", "shapedba"], default="dba")
    p.add_argument("--reach", type=int, default=15)
    p.add_argument("--max-iters", type=int, default=50)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ari", default=None, help="labels file; prints ARI against assignments")
    p.add_argument("dataset")
    p.add_argument("-o", "--output", required=True, help="result JSON path")

    p = sub.add_parser("filters", help="hand-crafted filter bank features")
    p.add_argument("--lengths", default="4,8,16", help="comma-separated kernel lengths")
    p.add_argument("--dilation", type=int, default=1)
    p.add_argument("series")
    p.add_argument("-o", "--output", required=True, help="feature TSV (channels as columns)")

    p = sub.add_parser("eval-gen", help="fidelity/diversity report for generated data")
    p.add_argument("--real", required=True, help="real latent vectors CSV")
    p.add_argument("--gen", required=True, help="generated latent vectors CSV")
    p.add_argument("--labels-real", default=None)
    p.add_argument("--labels-gen", default=None)
    p.add_argument("--pred-gen", default=None, help="predicted labels for AOG")
    p.add_argument("--raw-real", default=None, help="raw series dataset for WPD")
    p.add_argument("--raw-gen", default=None, help="raw series dataset for WPD")
    p.add_argument("--k", type=int, default=genmetrics.DEFAULT_K)
    p.add_argument("--s", type=int, default=genmetrics.DEFAULT_SUBSET)
    p.add_argument("--r", type=int, default=genmetrics.DEFAULT_REPEATS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="report JSON path")

    p = sub.add_parser("mcm", help="multi-comparison matrix from a results CSV")
    p.add_argument("results", help="CSV: dataset column then one column per comparate")
    p.add_argument("--rows", default=None, help="comma-separated comparate subset")
    p.add_argument("--cols", default=None, help="comma-separated comparate subset")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--lower-is-better", action="store_true")
    p.add_argument("-o", "--output", required=True, help="output directory")

    for name, sp in sub.choices.items():
        sp.add_argument("--threads", type=int, default=1,
                        help="thread pool size for pairwise distance loops (results unchanged)")
    return parser


def _require_file(path: str) -> str:
    if not os.path.isfile(path):
        raise DataError(f"input file not found: {path}")
    return path


def _load_latent(path: str, labels_path: str | None = None) -> genmetrics.LatentSet:
    try:
        vectors = np.loadtxt(_require_file(path), delimiter=",", ndmin=2)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
    labels = None
    if labels_path is not None:
        labels = np.loadtxt(_require_file(labels_path), ndmin=1)
    return genmetrics.LatentSet(vectors, labels)


def _cmd_distance(args) -> int:
    a = data.read_series(_require_file(args.series_a))
    b = data.read_series(_require_file(args.series_b))
    path_pairs = None
    if args.kind == "ed":
        cost = euclidean(a, b)
    elif args.kind == "dtw":
        cost, path = dtw(a, b)
        path_pairs = path.pairs
    elif args.kind == "softdtw":
        cost = soft_dtw(a, b, args.gamma)
    elif args.kind == "msm":
        cost = msm(a, b, args.msm_cost)
    else:
        cost, path = shape_dtw(a, b, args.reach)
        path_pairs = path.pairs
    print(format(cost, ".17g"))
    if args.path:
        if path_pairs is None:
            raise UsageError(f"--path is only available for dtw and shapedtw, not {args.kind}")
        print(_render_json([[int(i), int(j)] for i, j in path_pairs]))
    if args.output:
        os.makedirs(args.output, exist_ok=True)
        result = {"schema_version": SCHEMA_VERSION, "cost": cost}
        if path_pairs is not None:
            result["path"] = [[int(i), int(j)] for i, j in path_pairs]
        write_json(result, os.path.join(args.output, "distance.json"))
        _write_run_config(args.output, "distance", {
            "kind": args.kind, "gamma": args.gamma, "msm_cost": args.msm_cost,
            "reach": args.reach, "series_a": args.series_a, "series_b": args.series_b,
            "output": args.output, "threads": args.threads,
        })
    return 0


def _cmd_average(args) -> int:
    ds = data.load_ucr_dataset(_require_file(args.dataset))
    if args.method == "mean":
        proto = averaging.arithmetic_mean(ds)
    elif args.method == "dba":
        proto = averaging.dba(ds, max_iters=args.max_iters, tol=args.tol, seed=args.seed)
    else:
        proto = averaging.shape_dba(ds, args.reach, max_iters=args.max_iters,
                                    tol=args.tol, seed=args.seed)
    data.save_series(proto.series, args.output)
    _write_run_config(_outdir_for(args.output), "average", {
        "method": args.method, "reach": args.reach, "max_iters": args.max_iters,
        "tol": args.tol, "seed": args.seed, "dataset": args.dataset,
        "output": args.output, "threads": args.threads,
        "objective_trace": proto.objective_trace, "converged": proto.converged,
    })
    return 0


def _cmd_extend(args) -> int:
    ds = data.load_ucr_dataset(_require_file(args.dataset))
    if ds.labels is None:
        raise DataError(f"{args.dataset}: extension needs a labels column with real scores")
    extended = averaging.extend_dataset(ds, args.neighbors, args.reach, seed=args.seed,
                                        threads=args.threads)
    data.save_dataset(extended, args.output)
    _write_run_config(_outdir_for(args.output), "extend", {
        "neighbors": args.neighbors, "reach": args.reach, "seed": args.seed,
        "dataset": args.dataset, "output": args.output, "threads": args.threads,
    })
    return 0


def _cmd_cluster(args) -> int:
    ds = data.load_ucr_dataset(_require_file(args.dataset))
    config = DistanceConfig(kind=args.distance, reach=args.reach)
    result = clustering.kmeans_eba(ds, args.k, config, args.avg,
                                   max_iters=args.max_iters, eps=args.eps, seed=args.seed,
                                   threads=args.threads)
    outdir = _outdir_for(args.output)
    os.makedirs(outdir, exist_ok=True)
    centroid_paths = []
    stem = os.path.splitext(os.path.basename(args.output))[0]
    for j, c in enumerate(result.centroids):
        cpath = os.path.join(outdir, f"{stem}_centroid_{j}.tsv")
        data.save_series(c, cpath)
        centroid_paths.append(cpath)
    write_json({
        "schema_version": SCHEMA_VERSION,
        "assignments": [int(v) for v in result.assignments],
        "inertia": result.inertia,
        "inertia_trace": result.inertia_trace,
        "iterations": result.iterations,
        "converged": result.converged,
        "centroid_files": centroid_paths,
    }, args.output)
    _write_run_config(outdir, "cluster", {
        "k": args.k, "distance": args.distance, "avg": args.avg, "reach": args.reach,
        "max_iters": args.max_iters, "eps": args.eps, "seed": args.seed,
        "dataset": args.dataset, "output": args.output, "threads": args.threads,
    })
    if args.ari:
        labels = np.loadtxt(_require_file(args.ari), ndmin=1)
        print(format(clustering.adjusted_rand_index(labels, result.assignments), ".17g"))
    return 0


def _cmd_filters(args) -> int:
    series = data.read_series(_require_file(args.series))
    try:
        lengths = [int(v) for v in args.lengths.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"--lengths must be comma-separated integers: {exc}") from exc
    bank, meta = filters.handcrafted_bank(series, lengths, args.dilation)
    with open(args.output, "w") as fh:
        fh.write("\t".join(f"{kind}_{K}" for kind, K in meta) + "\n")
        for row in bank.values:
            fh.write("\t".join(format(v, ".17g") for v in row) + "\n")
    _write_run_config(_outdir_for(args.output), "filters", {
        "lengths": lengths, "dilation": args.dilation, "series": args.series,
        "output": args.output, "threads": args.threads,
    })
    return 0


def _cmd_eval_gen(args) -> int:
    real = _load_latent(args.real, args.labels_real)
    gen = _load_latent(args.gen, args.labels_gen)
    raw_real = raw_gen = None
    if (args.raw_real is None) != (args.raw_gen is None):
        raise UsageError("--raw-real and --raw-gen must be given together")
    if args.raw_real is not None:
        raw_real = data.load_ucr_dataset(_require_file(args.raw_real)).samples
        raw_gen = data.load_ucr_dataset(_require_file(args.raw_gen)).samples
    aog_true = aog_pred = None
    if args.pred_gen is not None:
        if args.labels_gen is None:
            raise UsageError("--pred-gen needs --labels-gen as the conditioning ground truth")
        aog_true = gen.labels
        aog_pred = np.loadtxt(_require_file(args.pred_gen), ndmin=1)
    report = genmetrics.evaluate_generation(
        real, gen, k=args.k, subset=args.s, repeats=args.r, seed=args.seed,
        raw_real=raw_real, raw_generated=raw_gen,
        aog_true=aog_true, aog_predicted=aog_pred,
    )
    payload = {"schema_version": SCHEMA_VERSION}
    for name, res in report.items():
        payload[name] = {
            "value": res.value,
            "real_reference": res.real_reference,
            "params": res.params,
        }
    write_json(payload, args.output)
    _write_run_config(_outdir_for(args.output), "eval-gen", {
        "real": args.real, "gen": args.gen, "labels_real": args.labels_real,
        "labels_gen": args.labels_gen, "pred_gen": args.pred_gen,
        "raw_real": args.raw_real, "raw_gen": args.raw_gen,
        "k": args.k, "s": args.s, "r": args.r, "seed": args.seed,
        "output": args.output, "threads": args.threads,
    })
    return 0


def _read_results_csv(path: str) -> benchstats.ResultsTable:
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if len(lines) < 2:
        raise DataError(f"{path}: need a header and at least one dataset row")
    header = [c.strip() for c in lines[0].split(",")]
    if len(header) < 3 or header[0].lower() != "dataset":
        raise DataError(f"{path}: first column must be 'dataset' followed by comparates")
    comparates = header[1:]
    datasets, rows = [], []
    for lineno, ln in enumerate(lines[1:], start=2):
        cells = [c.strip() for c in ln.split(",")]
        if len(cells) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} columns, got {len(cells)}")
        datasets.append(cells[0])
        try:
            rows.append([float(c) for c in cells[1:]])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: {exc}") from exc
    return benchstats.ResultsTable(datasets, comparates, np.array(rows))


def _mcm_text_grid(mcm: benchstats.Mcm) -> str:
    width = 24
    lines = ["".ljust(width) + "".join(c.ljust(width) for c in mcm.cols)]
    for r in mcm.rows:
        cells = []
        for c in mcm.cols:
            if r == c:
                cells.append("-".ljust(width))
                continue
            cell = mcm.cells[(r, c)]
            text = f"{cell.mean_diff:+.4f} {cell.wins}/{cell.ties}/{cell.losses} p={cell.p_value:.4f}"
            if cell.significant:
                text += "*"
            cells.append(text.ljust(width))
        lines.append(r.ljust(width) + "".join(cells))
    return "\n".join(lines) + "\n"


def _cmd_mcm(args) -> int:
    table = _read_results_csv(_require_file(args.results))
    if args.lower_is_better:
        table.higher_is_better = False
    rows = [c.strip() for c in args.rows.split(",")] if args.rows else None
    cols = [c.strip() for c in args.cols.split(",")] if args.cols else None
    try:
        mcm = benchstats.build_mcm(table, rows, cols, alpha=args.alpha)
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    os.makedirs(args.output, exist_ok=True)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "ordering": mcm.ordering,
        "mean_scores": {c: mcm.mean_scores[c] for c in mcm.ordering},
        "alpha": mcm.alpha,
        "rows": mcm.rows,
        "cols": mcm.cols,
        "cells": [
            {
                "row": r, "col": c,
                "mean_diff": cell.mean_diff,
                "wins": cell.wins, "ties": cell.ties, "losses": cell.losses,
                "p_value": cell.p_value, "significant": cell.significant,
            }
            for (r, c), cell in sorted(mcm.cells.items())
        ],
    }
    write_json(payload, os.path.join(args.output, "mcm.json"))
    with open(os.path.join(args.output, "mcm.csv"), "w") as fh:
        fh.write("row,col,mean_diff,wins,ties,losses,p_value,significant\n")
        for (r, c), cell in sorted(mcm.cells.items()):
            fh.write(
                f"{r},{c},{format(cell.mean_diff, '.17g')},{cell.wins},{cell.ties},"
                f"{cell.losses},{format(cell.p_value, '.17g')},{int(cell.significant)}\n"
            )
    with open(os.path.join(args.output, "mcm.txt"), "w") as fh:
        fh.write(_mcm_text_grid(mcm))
    _write_run_config(args.output, "mcm", {
        "results": args.results, "rows": args.rows, "cols": args.cols,
        "alpha": args.alpha, "lower_is_better": args.lower_is_better,
        "output": args.output, "threads": args.threads,
    })
    return 0


_COMMANDS = {
    "distance": _cmd_distance,
    "average": _cmd_average,
    "extend": _cmd_extend,
    "cluster": _cmd_cluster,
    "filters": _cmd_filters,
    "eval-gen": _cmd_eval_gen,
    "mcm": _cmd_mcm,
}


def dispatch(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.subcommand](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (DataError, data.ParseError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
