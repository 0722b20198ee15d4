"""Command line interface.

Subcommand groups: ``graph`` (inspect and reduce networks), ``oracle``
(exact forest statistics), ``forest`` (sampling and empirical checks),
``tune`` (killing-rate selection), ``signal`` (multiresolution analysis
of signals and graymap images).

Exit codes: 0 success, 2 invalid parameters or malformed command line,
3 input/output failures, 4 numerical failures.  All outputs are
deterministic byte-for-byte given identical inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
from contextlib import nullcontext

import numpy as np

from . import __version__
from . import coarsegrain as cg
from . import fileio, oracle, sampler
from . import wavelets as wv
from .errors import (
    InvalidParams,
    MalformedInput,
    NumericalError,
    ValidationError,
)
from .network import Network, skeleton

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def _fmt(x: float) -> str:
    return repr(float(x))


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _id_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated ids: {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated numbers: {text!r}"
        )


def _edge_list(text: str) -> list[tuple[int, int]]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        parts = tok.split("-")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(
                f"expected edges like '0-1,2-3': {text!r}"
            )
        try:
            out.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad edge {tok!r}")
    if not out:
        raise argparse.ArgumentTypeError("empty edge list")
    return out


def _load_network(args) -> Network:
    with open(args.edges) as fh:
        return fileio.read_network(fh, getattr(args, "undirected", False))


def _load_pyramid(args):
    with open(args.pyramid) as fh:
        return fileio.read_pyramid(fh)


def _out(args, binary: bool = False):
    path = getattr(args, "output", None)
    if path:
        return open(path, "wb" if binary else "w")
    return nullcontext(sys.stdout.buffer if binary else sys.stdout)


def _dry(args) -> bool:
    if getattr(args, "dry_run", False):
        print("dry-run: inputs valid")
        return True
    return False


# ---------------------------------------------------------------------------
# graph commands


def cmd_graph_info(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    if args.json:
        doc = {
            "n": net.n,
            "edges": len(net.edge_weights),
            "w_max": net.w_max,
            "reversible": net.reversible,
            "mu": [float(x) for x in net.mu],
        }
        print(_dumps(doc))
    else:
        print(f"n={net.n}")
        print(f"edges={len(net.edge_weights)}")
        print(f"w_max={_fmt(net.w_max)}")
        print(f"reversible={'yes' if net.reversible else 'no'}")
        print("mu=" + ",".join(_fmt(x) for x in net.mu))
    return EXIT_OK


def cmd_graph_skeleton(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    P = skeleton(net)
    print(_dumps([[float(x) for x in row] for row in P]))
    return EXIT_OK


def cmd_graph_reduce(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    reduction = cg.schur_reduce(net, args.keep)
    if args.sparsify_theta is not None:
        if args.q_prime is None:
            raise InvalidParams("--sparsify-theta requires --q-prime")
        reduction = cg.sparsify(reduction, args.q_prime, args.sparsify_theta)
    with _out(args) as fh:
        if args.json:
            doc = {
                "kept": [int(v) for v in reduction.kept],
                "mu": [float(x) for x in reduction.mu],
                "edges": [
                    [s, d, w]
                    for (s, d), w in sorted(
                        reduction.network.edge_weights.items()
                    )
                ],
            }
            fh.write(_dumps(doc) + "\n")
        else:
            fileio.write_edges(fh, reduction.network)
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle commands


def cmd_oracle_partition(args) -> int:
    net = _load_network(args)
    if args.q < 0:
        raise InvalidParams("killing rate q must be >= 0")
    if _dry(args):
        return EXIT_OK
    print(_fmt(oracle.partition_fn(net, args.q, args.roots)))
    return EXIT_OK


def cmd_oracle_green(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    kern = oracle.green(net, args.q, args.roots)
    doc = {
        "q": kern.q,
        "roots": [int(v) for v in kern.roots],
        "G": [[float(x) for x in row] for row in kern.G],
        "K": [[float(x) for x in row] for row in kern.K],
    }
    print(_dumps(doc))
    return EXIT_OK


def cmd_oracle_root_prob(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    print(_fmt(oracle.root_inclusion_prob(net, args.q, args.vertices, args.roots)))
    return EXIT_OK


def cmd_oracle_edge_prob(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    print(
        _fmt(
            oracle.edge_inclusion_prob(
                net, args.q, args.edges_in_forest, args.roots, signed=args.signed
            )
        )
    )
    return EXIT_OK


def cmd_oracle_root_count(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    law = oracle.root_count_law(net, args.q, args.roots)
    if args.json:
        doc = {
            "pmf": {str(int(k)): float(p) for k, p in law.as_dict().items() if p > 0},
            "mean": law.mean,
            "variance": law.variance,
        }
        print(_dumps(doc))
    else:
        parts = [
            f"{int(k)}:{_fmt(p)}" for k, p in zip(law.counts, law.pmf) if p > 0
        ]
        print(" ".join(parts))
    return EXIT_OK


def cmd_oracle_path_prob(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    print(_fmt(oracle.lerw_path_prob(net, args.q, args.path, args.roots)))
    return EXIT_OK


def cmd_oracle_hitting(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    h = oracle.hitting_times(net, args.targets)
    with _out(args) as fh:
        fileio.write_signal(fh, h)
    return EXIT_OK


def cmd_oracle_mean_root_hitting(args) -> int:
    net = _load_network(args)
    if (args.q is None) == (args.root_count is None):
        raise InvalidParams("exactly one of --q and --root-count is required")
    if _dry(args):
        return EXIT_OK
    if args.q is not None:
        print(_fmt(oracle.mean_root_hitting(net, args.q)))
    else:
        print(_fmt(oracle.mean_root_hitting_conditional(net, args.root_count)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# forest commands


def cmd_forest_sample(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    forest = sampler.wilson_sample(
        net, args.q, args.roots, seed=args.seed, sample_index=args.sample_index
    )
    with _out(args) as fh:
        fileio.write_forest(fh, forest)
    return EXIT_OK


def cmd_forest_stats(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    stats = sampler.empirical_stats(
        net,
        args.q,
        args.roots,
        args.samples,
        seed=args.seed,
        threads=args.threads,
    )
    doc = {
        "n_samples": stats.n_samples,
        "mean_roots": stats.mean_roots,
        "root_freq": [float(x) for x in stats.root_freq],
        "root_count_hist": {
            str(int(k)): int(v) for k, v in sorted(stats.root_count_hist.items())
        },
        "edge_freq": {
            f"{s}->{d}": float(f)
            for (s, d), f in sorted(stats.edge_freq.items())
            if f > 0
        },
        "chi2_stat": stats.chi2_stat,
        "chi2_pvalue": stats.chi2_pvalue,
    }
    print(_dumps(doc))
    return EXIT_OK


def cmd_forest_roots_target(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    result = sampler.sample_with_m_roots(
        net,
        args.m,
        args.roots,
        seed=args.seed,
        q0=args.q0,
        max_iters=args.max_iters,
    )
    if args.json:
        doc = {
            "q": result.q,
            "iterations": result.iterations,
            "converged": result.converged,
            "roots": [int(v) for v in result.forest.roots],
            "parent": [int(p) for p in result.forest.parent],
        }
        print(_dumps(doc))
    else:
        with _out(args) as fh:
            fh.write(f"# iterations={result.iterations}\n")
            fh.write(f"# converged={'yes' if result.converged else 'no'}\n")
            fileio.write_forest(fh, result.forest)
    return EXIT_OK


def cmd_forest_walk(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    path = sampler.loop_erased_walk(
        net,
        args.q,
        args.start,
        args.roots,
        seed=args.seed,
        sample_index=args.sample_index,
    )
    print(",".join(str(int(v)) for v in path))
    return EXIT_OK


def cmd_forest_equilibrium_check(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    report = sampler.conditional_root_equilibrium_check(
        net, args.q, args.samples, seed=args.seed, min_count=args.min_count
    )
    doc = {
        "n_samples": report.n_samples,
        "min_count": report.min_count,
        "max_tv": report.max_tv,
        "entries": [
            {
                "blocks": [[int(v) for v in b] for b in e.blocks],
                "count": e.count,
                "max_tv": e.max_tv,
            }
            for e in report.entries
        ],
    }
    print(_dumps(doc))
    return EXIT_OK


# ---------------------------------------------------------------------------
# tuning


def cmd_tune(args) -> int:
    net = _load_network(args)
    if _dry(args):
        return EXIT_OK
    records = sampler.estimate_tuning(
        net, args.grid, args.samples, seed=args.seed, threads=args.threads
    )
    best = min(records, key=lambda r: (r.objective, -r.q))
    if args.json:
        doc = {
            "chosen_q": best.q,
            "records": [
                {
                    "q": r.q,
                    "w_tilde": r.w_tilde,
                    "one_over_beta_tilde": r.one_over_beta_tilde,
                    "objective": r.objective,
                    "mean_roots": r.mean_roots,
                }
                for r in records
            ],
        }
        print(_dumps(doc))
    else:
        for r in records:
            print(
                f"q={_fmt(r.q)} objective={_fmt(r.objective)} "
                f"w_tilde={_fmt(r.w_tilde)} "
                f"one_over_beta_tilde={_fmt(r.one_over_beta_tilde)} "
                f"mean_roots={_fmt(r.mean_roots)}"
            )
        print(f"chosen q={_fmt(best.q)}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# signal commands


def _build_pyramid_from_args(args, net: Network, values: np.ndarray) -> wv.Pyramid:
    return wv.build_pyramid(
        net,
        values,
        seed=args.seed,
        max_levels=args.levels,
        min_size=args.min_size,
        sparsify_theta=args.sparsify_theta,
        n_tuning_samples=args.tuning_samples,
        threads=args.threads,
    )


def cmd_signal_analyze(args) -> int:
    net = _load_network(args)
    with open(args.signal) as fh:
        values = fileio.read_signal(fh, net.n)
    if _dry(args):
        return EXIT_OK
    pyr = _build_pyramid_from_args(args, net, values)
    with _out(args) as fh:
        fileio.write_pyramid(fh, pyr)
    return EXIT_OK


def _compressed_values(pyr: wv.Pyramid, args) -> np.ndarray:
    if getattr(args, "keep_count", None) is not None:
        return wv.compress(pyr, args.keep_count).values
    if getattr(args, "keep_fraction", None) is not None:
        frac = args.keep_fraction
        if not (0.0 <= frac <= 1.0):
            raise InvalidParams("--keep-fraction must lie in [0, 1]")
        return wv.compress(pyr, int(round(frac * pyr.detail_count()))).values
    return wv.reconstruct_pyramid(pyr)


def cmd_signal_reconstruct(args) -> int:
    pyr, _ = _load_pyramid(args)
    if _dry(args):
        return EXIT_OK
    values = _compressed_values(pyr, args)
    with _out(args) as fh:
        fileio.write_signal(fh, values)
    return EXIT_OK


def cmd_signal_approx(args) -> int:
    pyr, _ = _load_pyramid(args)
    if _dry(args):
        return EXIT_OK
    with _out(args) as fh:
        fileio.write_signal(fh, wv.approximation(pyr))
    return EXIT_OK


def cmd_signal_compress(args) -> int:
    pyr, _ = _load_pyramid(args)
    if _dry(args):
        return EXIT_OK
    results = wv.compression_curve(pyr, args.fractions)
    with _out(args) as fh:
        fh.write("fraction,keep_count,total_details,rel_error\n")
        for frac, res in zip(args.fractions, results):
            fh.write(
                f"{_fmt(frac)},{res.keep_count},{res.total_details},"
                f"{_fmt(res.rel_error)}\n"
            )
    return EXIT_OK


def cmd_signal_bounds(args) -> int:
    pyr, _ = _load_pyramid(args)
    if _dry(args):
        return EXIT_OK
    report = wv.stability_bounds(pyr, args.p)
    doc = {
        "p": "inf" if report.p == float("inf") else report.p,
        "analysis_measured": report.analysis_measured,
        "analysis_bound": report.analysis_bound,
        "approx_gap_measured": report.approx_gap_measured,
        "approx_gap_bound": report.approx_gap_bound,
        "all_dominated": report.all_dominated(),
        "levels": [
            {
                "level": lb.level,
                "q_prime": lb.q_prime,
                "approx_measured": lb.approx_measured,
                "approx_bound": lb.approx_bound,
                "detail_measured": lb.detail_measured,
                "detail_bound": lb.detail_bound,
                "detail_size_measured": lb.detail_size_measured,
                "detail_size_bound": lb.detail_size_bound,
            }
            for lb in report.levels
        ],
    }
    print(_dumps(doc))
    return EXIT_OK


def cmd_signal_image_analyze(args) -> int:
    with open(args.image, "rb") as fh:
        image, maxval = fileio.read_pgm(fh)
    rows, cols = image.shape
    net = fileio.grid_network(rows, cols)
    if _dry(args):
        return EXIT_OK
    pyr = _build_pyramid_from_args(args, net, image.ravel())
    meta = {"rows": rows, "cols": cols, "maxval": maxval}
    with _out(args) as fh:
        fileio.write_pyramid(fh, pyr, meta)
    return EXIT_OK


def cmd_signal_image_reconstruct(args) -> int:
    pyr, meta = _load_pyramid(args)
    if not {"rows", "cols"} <= set(meta):
        raise MalformedInput("pyramid archive carries no image geometry")
    if _dry(args):
        return EXIT_OK
    values = _compressed_values(pyr, args)
    rows, cols = int(meta["rows"]), int(meta["cols"])
    image = np.asarray(values).reshape(rows, cols)
    with _out(args, binary=True) as fh:
        fileio.write_pgm(fh, image, int(meta.get("maxval", 255)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="forestnets",
        description="Random spanning forests: exact statistics, sampling, "
        "coarse-graining and multiresolution signal analysis.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    edges_p = argparse.ArgumentParser(add_help=False)
    edges_p.add_argument("edges", help="edge list file (src<TAB>dst<TAB>weight)")
    edges_p.add_argument(
        "--undirected",
        action="store_true",
        help="add the reverse of every listed edge",
    )
    dry_p = argparse.ArgumentParser(add_help=False)
    dry_p.add_argument(
        "--dry-run",
        action="store_true",
        help="validate inputs and exit without computing",
    )
    out_p = argparse.ArgumentParser(add_help=False)
    out_p.add_argument("--output", help="write to this file instead of stdout")
    roots_p = argparse.ArgumentParser(add_help=False)
    roots_p.add_argument(
        "--roots",
        type=_id_list,
        default=[],
        help="comma-separated vertices forced to be roots",
    )

    # graph
    graph = sub.add_parser("graph", help="inspect and reduce networks")
    gsub = graph.add_subparsers(dest="subcommand", required=True)
    g_info = gsub.add_parser("info", parents=[edges_p, dry_p])
    g_info.add_argument("--json", action="store_true")
    g_info.set_defaults(func=cmd_graph_info)
    g_skel = gsub.add_parser("skeleton", parents=[edges_p, dry_p])
    g_skel.set_defaults(func=cmd_graph_skeleton)
    g_red = gsub.add_parser("reduce", parents=[edges_p, dry_p, out_p])
    g_red.add_argument("--keep", type=_id_list, required=True)
    g_red.add_argument("--sparsify-theta", type=float, default=None)
    g_red.add_argument("--q-prime", type=float, default=None)
    g_red.add_argument("--json", action="store_true")
    g_red.set_defaults(func=cmd_graph_reduce)

    # oracle
    orc = sub.add_parser("oracle", help="exact forest statistics")
    osub = orc.add_subparsers(dest="subcommand", required=True)
    o_part = osub.add_parser("partition", parents=[edges_p, dry_p, roots_p])
    o_part.add_argument("--q", type=float, required=True)
    o_part.set_defaults(func=cmd_oracle_partition)
    o_green = osub.add_parser("green", parents=[edges_p, dry_p, roots_p])
    o_green.add_argument("--q", type=float, required=True)
    o_green.set_defaults(func=cmd_oracle_green)
    o_rp = osub.add_parser("root-prob", parents=[edges_p, dry_p, roots_p])
    o_rp.add_argument("--q", type=float, required=True)
    o_rp.add_argument("--vertices", type=_id_list, required=True)
    o_rp.set_defaults(func=cmd_oracle_root_prob)
    o_ep = osub.add_parser("edge-prob", parents=[edges_p, dry_p, roots_p])
    o_ep.add_argument("--q", type=float, required=True)
    o_ep.add_argument(
        "--edges-in-forest",
        type=_edge_list,
        required=True,
        metavar="LIST",
        help="edges like '0-1,2-3'",
    )
    o_ep.add_argument(
        "--signed",
        action="store_true",
        help="count an edge when either orientation is present",
    )
    o_ep.set_defaults(func=cmd_oracle_edge_prob)
    o_rc = osub.add_parser("root-count", parents=[edges_p, dry_p, roots_p])
    o_rc.add_argument("--q", type=float, required=True)
    o_rc.add_argument("--json", action="store_true")
    o_rc.set_defaults(func=cmd_oracle_root_count)
    o_pp = osub.add_parser("path-prob", parents=[edges_p, dry_p, roots_p])
    o_pp.add_argument("--q", type=float, required=True)
    o_pp.add_argument("--path", type=_id_list, required=True)
    o_pp.set_defaults(func=cmd_oracle_path_prob)
    o_hit = osub.add_parser("hitting", parents=[edges_p, dry_p, out_p])
    o_hit.add_argument("--targets", type=_id_list, required=True)
    o_hit.set_defaults(func=cmd_oracle_hitting)
    o_mrh = osub.add_parser("mean-root-hitting", parents=[edges_p, dry_p])
    o_mrh.add_argument("--q", type=float, default=None)
    o_mrh.add_argument(
        "--root-count",
        type=int,
        default=None,
        help="condition on this many roots instead of using --q",
    )
    o_mrh.set_defaults(func=cmd_oracle_mean_root_hitting)

    # forest
    forest = sub.add_parser("forest", help="sampling and empirical checks")
    fsub = forest.add_subparsers(dest="subcommand", required=True)
    f_sample = fsub.add_parser("sample", parents=[edges_p, dry_p, out_p, roots_p])
    f_sample.add_argument("--q", type=float, required=True)
    f_sample.add_argument("--seed", type=int, required=True)
    f_sample.add_argument("--sample-index", type=int, default=0)
    f_sample.set_defaults(func=cmd_forest_sample)
    f_stats = fsub.add_parser("stats", parents=[edges_p, dry_p, roots_p])
    f_stats.add_argument("--q", type=float, required=True)
    f_stats.add_argument("--seed", type=int, required=True)
    f_stats.add_argument("--samples", type=int, required=True)
    f_stats.add_argument("--threads", type=int, default=1)
    f_stats.set_defaults(func=cmd_forest_stats)
    f_tgt = fsub.add_parser("roots-target", parents=[edges_p, dry_p, out_p, roots_p])
    f_tgt.add_argument("--m", type=int, required=True)
    f_tgt.add_argument("--seed", type=int, required=True)
    f_tgt.add_argument("--q0", type=float, default=None)
    f_tgt.add_argument("--max-iters", type=int, default=30)
    f_tgt.add_argument("--json", action="store_true")
    f_tgt.set_defaults(func=cmd_forest_roots_target)
    f_walk = fsub.add_parser("walk", parents=[edges_p, dry_p, roots_p])
    f_walk.add_argument("--q", type=float, required=True)
    f_walk.add_argument("--start", type=int, required=True)
    f_walk.add_argument("--seed", type=int, required=True)
    f_walk.add_argument("--sample-index", type=int, default=0)
    f_walk.set_defaults(func=cmd_forest_walk)
    f_eq = fsub.add_parser("equilibrium-check", parents=[edges_p, dry_p])
    f_eq.add_argument("--q", type=float, required=True)
    f_eq.add_argument("--seed", type=int, required=True)
    f_eq.add_argument("--samples", type=int, required=True)
    f_eq.add_argument("--min-count", type=int, default=100)
    f_eq.set_defaults(func=cmd_forest_equilibrium_check)

    # tune
    tune = sub.add_parser(
        "tune", parents=[edges_p, dry_p], help="killing-rate selection"
    )
    tune.add_argument("--seed", type=int, required=True)
    tune.add_argument("--grid", type=_float_list, default=None)
    tune.add_argument("--samples", type=int, default=16)
    tune.add_argument("--threads", type=int, default=1)
    tune.add_argument("--json", action="store_true")
    tune.set_defaults(func=cmd_tune)

    # signal
    signal = sub.add_parser("signal", help="multiresolution signal analysis")
    ssub = signal.add_subparsers(dest="subcommand", required=True)

    build_p = argparse.ArgumentParser(add_help=False)
    build_p.add_argument("--seed", type=int, required=True)
    build_p.add_argument("--levels", type=int, default=None)
    build_p.add_argument("--min-size", type=int, default=2)
    build_p.add_argument("--sparsify-theta", type=float, default=None)
    build_p.add_argument("--tuning-samples", type=int, default=16)
    build_p.add_argument("--threads", type=int, default=1)

    s_an = ssub.add_parser("analyze", parents=[edges_p, dry_p, out_p, build_p])
    s_an.add_argument("signal", help="signal file (vertex,value)")
    s_an.set_defaults(func=cmd_signal_analyze)

    pyr_p = argparse.ArgumentParser(add_help=False)
    pyr_p.add_argument("pyramid", help="pyramid archive (JSON)")
    keep_p = argparse.ArgumentParser(add_help=False)
    keep_grp = keep_p.add_mutually_exclusive_group()
    keep_grp.add_argument("--keep-count", type=int, default=None)
    keep_grp.add_argument("--keep-fraction", type=float, default=None)

    s_rec = ssub.add_parser("reconstruct", parents=[pyr_p, dry_p, out_p, keep_p])
    s_rec.set_defaults(func=cmd_signal_reconstruct)
    s_apx = ssub.add_parser("approx", parents=[pyr_p, dry_p, out_p])
    s_apx.set_defaults(func=cmd_signal_approx)
    s_cmp = ssub.add_parser("compress", parents=[pyr_p, dry_p, out_p])
    s_cmp.add_argument("--fractions", type=_float_list, required=True)
    s_cmp.set_defaults(func=cmd_signal_compress)
    s_bnd = ssub.add_parser("bounds", parents=[pyr_p, dry_p])
    s_bnd.add_argument("--p", type=float, required=True)
    s_bnd.set_defaults(func=cmd_signal_bounds)
    s_ia = ssub.add_parser("image-analyze", parents=[dry_p, out_p, build_p])
    s_ia.add_argument("image", help="P2/P5 graymap file")
    s_ia.set_defaults(func=cmd_signal_image_analyze)
    s_ir = ssub.add_parser(
        "image-reconstruct", parents=[pyr_p, dry_p, out_p, keep_p]
    )
    s_ir.set_defaults(func=cmd_signal_image_reconstruct)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MalformedInput as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
