"""Command-line interface: simulate, fit, eval, score, and sweep.

Exit codes: 0 on success, 1 on usage errors, 2 on data errors
(unparseable or inconsistent input files, dimension mismatches).
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import io
from .generate import gen_bipartite_tnpm, gen_undirected_pabm
from .metrics import ari, misclustering_rate, score_labels, soft_confusion
from .model import HardLabels, SoftAssignment
from .sweep import run_sweep
from .vem import FitConfig, fit, fit_undirected


class UsageError(Exception):
    """Inconsistent flag combinations (exit code 1)."""


def _grid_type(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid {text!r} must be comma-separated numbers") from None
    if not values:
        raise argparse.ArgumentTypeError("grid must be non-empty")
    return values


def _add_fit_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--restarts", type=int, default=10, metavar="N",
                        help="number of random restarts besides the SVD one (default 10)")
    parser.add_argument("--seed", type=int, default=0, help="base RNG seed (default 0)")
    parser.add_argument("--outer-tol", type=float, default=1e-8,
                        help="relative objective-change stopping threshold (default 1e-8)")
    parser.add_argument("--max-iters", type=int, default=200,
                        help="outer iteration cap per restart (default 200)")


def _config_from_args(args, mode: str) -> FitConfig:
    return FitConfig(
        n_random_restarts=args.restarts,
        max_outer_iters=args.max_iters,
        outer_tol=args.outer_tol,
        seed=args.seed,
        mode=mode,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tnpm",
        description="Fit and benchmark the two-way node popularity model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a planted benchmark network")
    p_sim.add_argument("--kind", choices=("bipartite", "undirected"), required=True)
    p_sim.add_argument("--num-rows", type=int, default=800, metavar="M",
                       help="bipartite row nodes (default 800)")
    p_sim.add_argument("--num-cols", type=int, default=1000, metavar="N",
                       help="bipartite column nodes (default 1000)")
    p_sim.add_argument("--rows", type=int, default=3, metavar="K",
                       help="row communities (default 3)")
    p_sim.add_argument("--cols", type=int, default=4, metavar="L",
                       help="column communities (default 4)")
    p_sim.add_argument("--density", type=float, default=0.3, metavar="R",
                       help="bipartite density factor r (default 0.3)")
    p_sim.add_argument("--nodes", type=int, default=400, metavar="N",
                       help="undirected node count (default 400)")
    p_sim.add_argument("--homophily", type=float, default=2.0, metavar="H",
                       help="undirected homophily factor h (default 2.0)")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--output-prefix", required=True)
    p_sim.set_defaults(func=cmd_simulate)

    p_fit = sub.add_parser("fit", help="fit the model to an edge list")
    p_fit.add_argument("--input", required=True, help="edge-list file")
    p_fit.add_argument("--output-prefix", required=True)
    p_fit.add_argument("--rows", type=int, required=True, metavar="K",
                       help="number of row communities")
    p_fit.add_argument("--cols", type=int, default=None, metavar="L",
                       help="number of column communities (bipartite; defaults to K when undirected)")
    p_fit.add_argument("--mode", choices=("bipartite", "undirected"), default="bipartite")
    p_fit.add_argument("--binary", action="store_true",
                       help="binarize counts after aggregation (ratings-style data)")
    _add_fit_flags(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_eval = sub.add_parser("eval", help="compare two label files")
    p_eval.add_argument("labels_a", help="label file, e.g. planted truth")
    p_eval.add_argument("labels_b", help="label file, e.g. fitted output")
    p_eval.set_defaults(func=cmd_eval)

    p_score = sub.add_parser("score", help="objective value of a given labeling")
    p_score.add_argument("--input", required=True, help="edge-list file")
    p_score.add_argument("--row-labels", required=True)
    p_score.add_argument("--col-labels", required=True)
    p_score.add_argument("--rows", type=int, required=True, metavar="K")
    p_score.add_argument("--cols", type=int, required=True, metavar="L")
    p_score.add_argument("--mode", choices=("bipartite", "undirected"), default="bipartite")
    p_score.add_argument("--binary", action="store_true")
    p_score.set_defaults(func=cmd_score)

    p_sweep = sub.add_parser("sweep", help="replicated recovery benchmark over a grid")
    p_sweep.add_argument("--kind", choices=("bipartite", "undirected"), required=True)
    p_sweep.add_argument("--grid", type=_grid_type, required=True,
                         help="comma-separated parameter values (r or h)")
    p_sweep.add_argument("--replicates", type=int, default=20)
    p_sweep.add_argument("--num-rows", type=int, default=200, metavar="M")
    p_sweep.add_argument("--num-cols", type=int, default=250, metavar="N")
    p_sweep.add_argument("--rows", type=int, default=None, metavar="K",
                         help="row communities (default 3 bipartite, 2 undirected)")
    p_sweep.add_argument("--cols", type=int, default=None, metavar="L",
                         help="column communities (bipartite only, default 4)")
    p_sweep.add_argument("--nodes", type=int, default=200, metavar="N",
                         help="undirected node count (default 200)")
    p_sweep.add_argument("--jobs", type=int, default=1,
                         help="worker processes for replicates (default 1)")
    p_sweep.add_argument("--no-figure", action="store_true",
                         help="skip rendering the ARI figure")
    p_sweep.add_argument("--output-prefix", required=True)
    _add_fit_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    return parser


def cmd_simulate(args) -> int:
    prefix = args.output_prefix
    io.ensure_parent(prefix + "_edges.tsv")
    if args.kind == "bipartite":
        net = gen_bipartite_tnpm(
            args.num_rows, args.num_cols, args.rows, args.cols, args.density, args.seed
        )
        row_ids = [f"u{i}" for i in range(net.A.m)]
        col_ids = [f"v{j}" for j in range(net.A.n)]
        io.write_edge_list(prefix + "_edges.tsv", net.A, row_ids, col_ids)
        io.write_labels(prefix + "_row_labels.tsv", row_ids, net.z_true.labels)
        io.write_labels(prefix + "_col_labels.tsv", col_ids, net.w_true.labels)
        meta = {
            "format_version": 1,
            "kind": "bipartite",
            "num_rows": args.num_rows,
            "num_cols": args.num_cols,
            "row_clusters": args.rows,
            "col_clusters": args.cols,
            "density": args.density,
            "seed": args.seed,
        }
    else:
        net = gen_undirected_pabm(args.nodes, args.homophily, args.seed)
        ids = [f"v{i}" for i in range(net.A.n)]
        io.write_edge_list(prefix + "_edges.tsv", net.A, ids, ids, undirected=True)
        io.write_labels(prefix + "_labels.tsv", ids, net.labels.labels)
        io.write_labels(prefix + "_categories.tsv", ids, net.categories.labels)
        meta = {
            "format_version": 1,
            "kind": "undirected",
            "nodes": args.nodes,
            "homophily": args.homophily,
            "seed": args.seed,
        }
    io.write_metadata(prefix + "_meta.json", meta)
    print(f"wrote {prefix}_edges.tsv and sidecars")
    return 0


def cmd_fit(args) -> int:
    undirected = args.mode == "undirected"
    if undirected and args.cols is not None and args.cols != args.rows:
        raise UsageError("undirected mode uses --rows communities; --cols must match or be omitted")
    if not undirected and args.cols is None:
        raise UsageError("bipartite mode requires --cols")
    A, row_ids, col_ids = io.read_edge_list(args.input, binary=args.binary, undirected=undirected)
    config = _config_from_args(args, args.mode)
    start = time.perf_counter()
    if undirected:
        result = fit_undirected(A, args.rows, config)
    else:
        result = fit(A, args.rows, args.cols, config)
    runtime = time.perf_counter() - start

    prefix = args.output_prefix
    io.ensure_parent(prefix + "_report.tsv")
    io.write_labels(prefix + "_row_labels.tsv", row_ids, result.row_labels.labels)
    io.write_labels(prefix + "_col_labels.tsv", col_ids, result.col_labels.labels)
    io.write_matrix(prefix + "_qz.tsv", "qz", result.qz.probs)
    io.write_matrix(prefix + "_qw.tsv", "qw", result.qw.probs)
    io.write_matrix(prefix + "_theta.tsv", "theta", result.params.theta)
    io.write_matrix(prefix + "_lambda.tsv", "lambda", result.params.lam)
    io.write_matrix(prefix + "_pi.tsv", "pi", result.params.pi)
    io.write_matrix(prefix + "_rho.tsv", "rho", result.params.rho)
    report = {
        "mode": args.mode,
        "elbo": result.elbo,
        "restart_index": result.restart_index,
        "outer_iterations": result.outer_iterations,
        "converged": result.converged,
        "n_restarts": len(result.restart_elbos),
        "restart_elbos": result.restart_elbos,
        "elbo_trace": result.elbo_trace,
        "runtime_seconds": runtime,
    }
    if result.mutual_ari is not None:
        report["mutual_ari"] = result.mutual_ari
    io.write_fit_report(prefix + "_report.tsv", report)
    print(f"objective\t{io.fmt_float(result.elbo)}")
    print(f"restart_index\t{result.restart_index}")
    print(f"outer_iterations\t{result.outer_iterations}")
    print(f"wrote {prefix}_row_labels.tsv, {prefix}_col_labels.tsv, {prefix}_report.tsv")
    return 0


def cmd_eval(args) -> int:
    ids_a, raw_a = io.read_labels(args.labels_a)
    ids_b, raw_b = io.read_labels(args.labels_b)
    labels_a, labels_b = io.align_labels(ids_a, raw_a, ids_b, raw_b)
    a = HardLabels(labels_a, int(labels_a.max()) + 1)
    b = HardLabels(labels_b, int(labels_b.max()) + 1)
    print(f"ari\t{io.fmt_float(ari(a, b))}")
    rate = misclustering_rate(a, SoftAssignment.degenerate(b))
    print(f"misclustering_rate\t{io.fmt_float(rate)}")
    confusion = soft_confusion(SoftAssignment.degenerate(a), SoftAssignment.degenerate(b))
    print(f"confusion_matrix\t{a.n_clusters}\t{b.n_clusters}")
    for row in confusion.matrix:
        print("\t".join(io.fmt_float(x) for x in row))
    return 0


def cmd_score(args) -> int:
    undirected = args.mode == "undirected"
    A, row_ids, col_ids = io.read_edge_list(args.input, binary=args.binary, undirected=undirected)
    z_ids, z_raw = io.read_labels(args.row_labels)
    w_ids, w_raw = io.read_labels(args.col_labels)
    # align_labels orders by its first argument; reuse it to reorder the
    # label files onto the edge list's id order.
    _, z_vals = io.align_labels(row_ids, np.zeros(len(row_ids)), z_ids, z_raw)
    _, w_vals = io.align_labels(col_ids, np.zeros(len(col_ids)), w_ids, w_raw)
    if z_vals.max() >= args.rows or w_vals.max() >= args.cols:
        raise io.DataError("label index exceeds the requested cluster count")
    z = HardLabels(z_vals, args.rows)
    w = HardLabels(w_vals, args.cols)
    value = score_labels(A, z, w, args.rows, args.cols)
    print(f"objective\t{io.fmt_float(value)}")
    return 0


def cmd_sweep(args) -> int:
    config = _config_from_args(args, args.kind if args.kind == "undirected" else "bipartite")
    bipartite = args.kind == "bipartite"
    report = run_sweep(
        args.kind,
        args.grid,
        args.replicates,
        m=args.num_rows,
        n=args.num_cols if bipartite else args.nodes,
        K=args.rows if args.rows is not None else (3 if bipartite else 2),
        L=args.cols if args.cols is not None else 4,
        seed=args.seed,
        config=config,
        jobs=args.jobs if args.jobs and args.jobs > 1 else None,
    )
    prefix = args.output_prefix
    io.ensure_parent(prefix + "_records.tsv")
    report.write_records(prefix + "_records.tsv")
    report.write_summary(prefix + "_summary.tsv")
    written = [prefix + "_records.tsv", prefix + "_summary.tsv"]
    if not args.no_figure:
        from .plotting import plot_sweep

        plot_sweep(report, prefix + "_ari.png")
        written.append(prefix + "_ari.png")
    for summary in report.summaries:
        flag = " (single replicate; SE degenerate)" if summary.se_degenerate else ""
        print(
            f"param {io.fmt_float(summary.param)}: "
            f"vem row ARI {summary.means['vem_row_ari']:.4f} "
            f"(se {summary.standard_errors['vem_row_ari']:.4f}), "
            f"svd row ARI {summary.means['svd_row_ari']:.4f}{flag}"
        )
    print("wrote " + ", ".join(written))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else 1
        return 0 if code == 0 else 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except io.DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
