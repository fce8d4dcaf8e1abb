"""Command-line interface: ``distmod <command> [options]``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .attributes import (
    SCALED_KERNELS,
    DistanceSpec,
    KernelSpec,
    PairwiseDistances,
    canonical_kernel,
    mean_pairwise_distance,
    read_attributes,
)
from .benchgen import METHODS, BenchConfig, generate, grid_experiment
from .consensus import SweepError, default_sigma_grid, nmi, parse_grid, parse_scalar, run_sweep
from .graph import GraphError, read_edge_list, read_partition, write_edge_list, write_partition
from .nullmodels import DistModel, NGModel, NullModelError, SpaModel
from .optimizers import OptimizerConfig, optimize
from .stats import chi_squared_independence, default_bin_edges, effect_curve

logger = logging.getLogger("distmod")

EXIT_INPUT = 2
EXIT_DEGENERATE = 3


class InputError(Exception):
    pass


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=float)
        fh.write("\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_graph(args):
    if not args.edges:
        raise InputError("--edges is required")
    return read_edge_list(args.edges)


def _load_distances(args, g):
    if not args.attrs:
        raise InputError("this command needs --attrs with an attribute file")
    table = read_attributes(args.attrs, node_ids=g.node_ids)
    rho = [c.strip() for c in args.rho.split(",")] if args.rho else table.names()
    for col in rho:
        if col not in table:
            raise InputError(f"attribute {col!r} not in {args.attrs} (have {table.names()})")
    return PairwiseDistances(DistanceSpec(args.distance, tuple(rho)), table), table


def _kernel(args, dbar, sigma=None) -> KernelSpec:
    kind = canonical_kernel(args.kernel)
    if sigma is None and args.sigma is not None:
        sigma = parse_scalar(args.sigma, dbar)
    if sigma is None and kind in SCALED_KERNELS:
        sigma = dbar
    return KernelSpec(kind, sigma)


def _opt_config(args) -> OptimizerConfig:
    return OptimizerConfig(args.algo, args.seed, args.max_sweeps, args.min_gain)


def _build_model(args, g):
    if args.model == "ng":
        return NGModel(g), {}
    dist, table = _load_distances(args, g)
    dbar = mean_pairwise_distance(dist)
    if args.model == "spa":
        tau = args.tau if args.tau is not None else (dist.max() or 1.0) / 20.0
        h = table[args.importance] if args.importance else g.strengths
        return SpaModel(g, dist, np.asarray(h, dtype=float), tau), {"tau": float(tau), "dbar": dbar}
    kernel = _kernel(args, dbar)
    return DistModel(g, dist, kernel), {"kernel": kernel.kind, "sigma": kernel.sigma, "dbar": dbar}


def cmd_detect(args) -> int:
    t0 = time.perf_counter()
    g = _load_graph(args)
    model, info = _build_model(args, g)
    res = optimize(g, model, _opt_config(args))
    out = _out_dir(args)
    write_partition(out / "partition.csv", g.node_ids, res.labels)
    metrics = {
        "q": res.q,
        "communities": int(res.labels.max()) + 1,
        "model": args.model,
        "algorithm": _opt_config(args).algorithm,
        "sweeps": res.sweeps,
        "seed": args.seed,
        "nodes": g.n,
        "two_m": g.two_m,
        "wall_time": time.perf_counter() - t0,
        **info,
    }
    _write_json(out / "metrics.json", metrics)
    print(f"Q = {res.q:.6f}, {metrics['communities']} communities -> {out}")
    return 0


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    g = _load_graph(args)
    dist, _ = _load_distances(args, g)
    dbar = mean_pairwise_distance(dist)
    kind = canonical_kernel(args.kernel)
    grid = parse_grid(args.sigma_grid, dbar) if args.sigma_grid else default_sigma_grid(kind, dbar)
    sweep = run_sweep(g, dist, kind, grid, _opt_config(args), threads=args.threads)
    out = _out_dir(args)
    pdir = out / "partitions"
    pdir.mkdir(exist_ok=True)
    for k, labels in enumerate(sweep.labels):
        write_partition(pdir / f"sigma_{k:03d}.csv", g.node_ids, labels)
    _write_csv(out / "nmi_vs_sigma.csv", ["sigma", "i_avg", "q", "c"], sweep.table())
    _write_csv(
        out / "nmi_matrix.csv",
        ["sigma"] + [_fmt(s) for s in sweep.sigmas],
        [[s, *row] for s, row in zip(sweep.sigmas, sweep.nmi_matrix)],
    )
    write_partition(out / "partition.csv", g.node_ids, sweep.consensus_labels)
    metrics = {
        "kernel": kind,
        "dbar": dbar,
        "sigmas": [float(s) for s in sweep.sigmas],
        "consensus_sigma": sweep.consensus_sigma,
        "consensus_index": sweep.consensus_index,
        "q": float(sweep.q[sweep.consensus_index]),
        "communities": int(sweep.n_communities[sweep.consensus_index]),
        "failed": [{"sigma": s, "reason": r} for s, r in sweep.failed],
        "seed": args.seed,
        "wall_time": time.perf_counter() - t0,
    }
    _write_json(out / "metrics.json", metrics)
    print(f"consensus sigma = {sweep.consensus_sigma:.6g}, Q = {metrics['q']:.6f} -> {out}")
    return 0


def cmd_generate(args) -> int:
    bench = generate(BenchConfig(n=args.n, epsilon=args.epsilon, beta=args.beta, m=args.m, seed=args.seed))
    out = _out_dir(args)
    write_edge_list(bench.graph, out / "edges.txt")
    _write_csv(out / "attrs.csv", ["node", "x", "y"], [[i, x, y] for i, (x, y) in enumerate(bench.coords)])
    write_partition(out / "planted.csv", bench.graph.node_ids, bench.planted)
    print(f"wrote benchmark with {bench.graph.n} nodes, {args.m} links -> {out}")
    return 0


def cmd_nmi(args) -> int:
    ids1, l1 = read_partition(args.p1)
    ids2, l2 = read_partition(args.p2)
    if sorted(ids1.tolist()) != sorted(ids2.tolist()):
        raise InputError("partition files cover different node sets")
    o1, o2 = np.argsort(ids1), np.argsort(ids2)
    print(repr(nmi(l1[o1], l2[o2])))
    return 0


def cmd_effect(args) -> int:
    g = _load_graph(args)
    dist, table = _load_distances(args, g)
    dbar = mean_pairwise_distance(dist)
    models = {}
    for name in [m.strip() for m in args.models.split(",") if m.strip()]:
        if name == "ng":
            models["ng"] = NGModel(g)
        elif name == "spa":
            tau = args.tau if args.tau is not None else (dist.max() or 1.0) / 20.0
            models["spa"] = SpaModel(g, dist, g.strengths, tau)
        elif name == "dist":
            models["dist"] = DistModel(g, dist, _kernel(args, dbar))
        else:
            raise InputError(f"unknown model {name!r}")
    if args.bin_tau is not None:
        curve = effect_curve(g, dist, models=models, tau=args.bin_tau)
    else:
        edges = default_bin_edges(dist, args.bins, discrete=dist.spec.kind == "discrete")
        curve = effect_curve(g, dist, edges, models)
    out = _out_dir(args)
    _write_csv(out / "effect.csv", ["bin_lo", "bin_hi", "observed", *models], curve.rows())
    print(f"wrote {len(curve.observed)} bins -> {out / 'effect.csv'}")
    return 0


def cmd_chisq(args) -> int:
    table = read_attributes(args.attrs)
    for col in (args.a, args.b):
        if col not in table:
            raise InputError(f"attribute {col!r} not in {args.attrs}")
    res = chi_squared_independence(table[args.a].tolist(), table[args.b].tolist(), yates=args.yates)
    report = {"statistic": res.statistic, "dof": res.dof, "p_value": res.p_value, "table": res.table.tolist()}
    if args.out:
        _write_json(_out_dir(args) / "chisq.json", report)
    print(json.dumps(report, sort_keys=True))
    return 0


def cmd_grid(args) -> int:
    eps = parse_grid(args.epsilons)
    betas = parse_grid(args.betas)
    methods = [m.strip() for m in args.methods.split(",")] if args.methods else list(METHODS)
    rows = grid_experiment(
        betas, eps, args.replicates, methods, n=args.n, m=args.m, seed=args.seed, algorithm=args.algo
    )
    out = _out_dir(args)
    header = ["method", "epsilon", "beta", "mean_nmi", "std_nmi", "replicates"]
    _write_csv(out / "grid.csv", header, [[r[h] for h in header] for r in rows])
    print(f"wrote {len(rows)} rows -> {out / 'grid.csv'}")
    return 0


def _common(p: argparse.ArgumentParser, graph: bool = True, attrs: bool = True) -> None:
    if graph:
        p.add_argument("--edges", help="edge list file (u v [w] per line)")
    if attrs:
        p.add_argument("--attrs", help="attribute file (header row, node id first)")
        p.add_argument("--rho", help="comma-separated attribute columns (default: all)")
        p.add_argument("--distance", default="euclidean", choices=["euclidean", "greatcircle", "great-circle", "discrete"])
        p.add_argument("--kernel", default="gaussian",
                       choices=["gaussian", "reciprocal", "threshold", "constant", "step", "expdecay", "expinverse"])
        p.add_argument("--sigma", help="kernel parameter; suffix 'dbar' scales by the mean distance")
        p.add_argument("--tau", type=float, help="Spa bin size")
    p.add_argument("--algo", default="lpamplus", choices=["lpamplus", "louvain"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-sweeps", type=int, default=100)
    p.add_argument("--min-gain", type=float, default=1e-10)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="out")
    p.add_argument("--config", help="JSON run config; keys are option names")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="distmod", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="optimise one modularity variant")
    _common(p)
    p.add_argument("--model", default="dist", choices=["ng", "spa", "dist"])
    p.add_argument("--importance", help="attribute column used as Spa node importance")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("sweep", help="kernel-parameter sweep with consensus selection")
    _common(p)
    p.add_argument("--sigma-grid", help="lo:hi:step, optional 'dbar' suffix")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("generate", help="synthetic spatial benchmark")
    _common(p, graph=False, attrs=False)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--m", type=int, default=500)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("nmi", help="NMI between two partition files")
    p.add_argument("p1")
    p.add_argument("p2")
    p.set_defaults(func=cmd_nmi, config=None)

    p = sub.add_parser("effect", help="link weight versus distance, observed and expected")
    _common(p)
    p.add_argument("--models", default="ng,spa,dist")
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--bin-tau", type=float, help="use equal-width bins of this size from 0")
    p.set_defaults(func=cmd_effect)

    p = sub.add_parser("chisq", help="chi-squared independence of two categorical attributes")
    p.add_argument("--attrs", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--yates", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_chisq, config=None)

    p = sub.add_parser("grid", help="benchmark NMI table over (epsilon, beta)")
    _common(p, graph=False, attrs=False)
    p.add_argument("--epsilons", default="0.1,0.3,0.5")
    p.add_argument("--betas", default="0.3:1.0:0.1")
    p.add_argument("--replicates", type=int, default=100)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--m", type=int, default=500)
    p.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    p.set_defaults(func=cmd_grid)
    return parser


def _apply_config(parser, argv):
    """Re-parse with defaults taken from ``--config`` so explicit flags still win."""
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    with open(args.config) as fh:
        cfg = json.load(fh)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in cfg.items()})
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"distmod: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (NullModelError, SweepError) as exc:
        print(f"distmod: numerical degeneracy: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (InputError, GraphError, ValueError, KeyError, OSError) as exc:
        print(f"distmod: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
