"""Command-line entry point: ``iceentropy <subcommand> ...``.

Exit codes: 0 success, 2 input error, 3 resource limit, 4 non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .eo_exact import RT_LIMIT, eo_count, rt
from .eo_mc import MCConfig, estimate
from .errors import GraphError, IceEntropyError
from .estimates import (
    ReportOptions,
    clique_cycle_rho,
    pauling,
    report,
    rho_tau,
)
from .generators import LatticeSpec, make, parse_spec, random_switchings, symmetry_generators
from .graph import Graph, read_graph, to_edge_list
from .spanning import (
    hypercube_tau,
    tau_limit_product_cycle,
    tree_count_exact,
    tree_entropy,
    tube_tau_limit,
)
from .transfer import MAX_MATRIX_N, build

log = logging.getLogger("iceentropy")

TABLE_HEADERS = {
    "tubes": ["m", "tau", "rho", "rho_tau"],
    "three-cycles": ["m", "l", "n", "orbits", "tau", "rho", "rho_tau"],
    "cliques": ["m", "degree", "tau", "rho", "rho_hat", "rho_tau"],
    "hypercubes": ["d", "n", "rho_hat", "rho_tau", "rho_mc", "rho_lo", "rho_hi", "rho_is_estimate"],
}
EXPERIMENT_HEADER = ["switches_requested", "switches_applied", "tau", "rho_mc", "rho_lo", "rho_hi", "rho_tau", "seed"]


@dataclass(frozen=True)
class ExperimentRow:
    switches_requested: int
    switches_applied: int
    tau: float
    rho_mc: float
    rho_lo: float
    rho_hi: float
    rho_tau: float
    seed: int


# -- reusable drivers ----------------------------------------------------------


def _mix_seed(seed: int, i: int) -> int:
    ss = np.random.SeedSequence([int(seed) & (2**64 - 1), i])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def run_experiment_corrupt(
    base: LatticeSpec,
    max_switches: int,
    samples: int,
    mc: MCConfig,
    out=None,
    seed: int = 0,
) -> list[ExperimentRow]:
    """Rows at ``samples`` switch counts evenly spread over ``[0, max_switches]``.

    Every row starts again from the uncorrupted base graph.
    """
    g0 = make(base)
    if not g0.is_simple or np.any(g0.degrees % 2):
        raise GraphError("experiment base must be a simple graph with even degrees")
    if samples < 1 or max_switches < 0:
        raise GraphError("need samples >= 1 and max_switches >= 0")
    counts = np.rint(np.linspace(0, max_switches, samples)).astype(int) if samples > 1 else [max_switches]
    rows = []
    for i, k in enumerate(counts):
        row_seed = _mix_seed(seed, i)
        g, trace = random_switchings(g0, int(k), row_seed)
        tree = tree_entropy(g, exact=False)
        d = int(g.degrees[0])
        regular = bool(np.all(g.degrees == d))
        est = estimate(g, MCConfig(mc.trials_per_batch, mc.batches, seed=row_seed, workers=mc.workers))
        rows.append(
            ExperimentRow(
                switches_requested=int(k),
                switches_applied=trace.applied,
                tau=tree.tau,
                rho_mc=est.rho,
                rho_lo=est.rho_ci[0],
                rho_hi=est.rho_ci[1],
                rho_tau=rho_tau(d, tree.tau) if regular else math.nan,
                seed=row_seed,
            )
        )
        log.info("row %d/%d: %d switches, rho=%.6f", i + 1, len(counts), k, est.rho)
    if out is not None:
        _write_csv(out, EXPERIMENT_HEADER, [asdict(r) for r in rows], full=True)
    return rows


def run_table(name: str, params: dict | None = None, mc: MCConfig | None = None) -> list[dict]:
    """Rows for one of the reproduction tables (see :data:`TABLE_HEADERS`)."""
    p = dict(params or {})
    rows = []
    if name == "tubes":
        for m in range(p.get("min_m", 3), p.get("max_m", 16) + 1):
            spec = LatticeSpec("cycle", (m,))
            tau = tube_tau_limit(m)
            rho = build(make(spec), symmetry_generators(spec)).rho_limit
            rows.append({"m": m, "tau": tau, "rho": rho, "rho_tau": rho_tau(4, tau)})
    elif name == "three-cycles":
        max_n = p.get("max_n", 16)
        for m, l in ((3, 3), (3, 4), (3, 5), (3, 6), (4, 4), (4, 5)):
            spec = LatticeSpec("torus", (m, l))
            fiber = make(spec)
            tau = tau_limit_product_cycle(fiber)
            full = m * l <= min(max_n, MAX_MATRIX_N)
            sys_ = build(fiber, symmetry_generators(spec), matrix=full)
            rows.append(
                {
                    "m": m,
                    "l": l,
                    "n": m * l,
                    "orbits": sys_.n_orbits,
                    "tau": tau,
                    "rho": sys_.rho_limit if full else None,
                    "rho_tau": rho_tau(6, tau),
                }
            )
    elif name == "cliques":
        max_m = p.get("max_m", 11)
        if max_m + 2 > RT_LIMIT:
            raise GraphError(f"cliques table supports max_m <= {RT_LIMIT - 2}")
        for m in range(3, max_m + 1, 2):
            tau = tau_limit_product_cycle(make(LatticeSpec("clique", (m,))))
            rows.append(
                {
                    "m": m,
                    "degree": m + 1,
                    "tau": tau,
                    "rho": clique_cycle_rho(m),
                    "rho_hat": pauling([m + 1]),
                    "rho_tau": rho_tau(m + 1, tau),
                }
            )
    elif name == "hypercubes":
        max_d = p.get("max_d", 14)
        if max_d > 14:
            raise GraphError("hypercubes table supports max_d <= 14")
        for d in range(p.get("min_d", 4), max_d + 1, 2):
            row = {"d": d, "n": 2**d, "rho_hat": pauling([d]), "rho_tau": rho_tau(d, hypercube_tau(d))}
            row.update(rho_mc=None, rho_lo=None, rho_hi=None, rho_is_estimate=False)
            if mc is not None:
                est = estimate(make(LatticeSpec("hypercube", (d,))), mc)
                row.update(rho_mc=est.rho, rho_lo=est.rho_ci[0], rho_hi=est.rho_ci[1], rho_is_estimate=True)
            rows.append(row)
    else:
        raise GraphError(f"unknown table {name!r}")
    return rows


# -- formatting ------------------------------------------------------------------------


def _fmt(v, full: bool) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v)) if full else f"{float(v):.6f}"
    return str(v)


def _write_csv(out, header, rows, full: bool) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(r.get(h), full) for h in header])
    _emit(buf.getvalue(), out)


def _emit(text: str, out) -> None:
    if out is None or str(out) == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _show(args, header, row: dict) -> None:
    if args.csv:
        _write_csv(args.out, header, [row], args.full_precision)
        return
    width = max(len(h) for h in header)
    _emit("".join(f"{h:<{width}}  {_fmt(row.get(h), args.full_precision)}\n" for h in header), args.out)


def _load(args) -> Graph:
    if args.family:
        return make(parse_spec(args.family))
    if args.input:
        return read_graph(args.input)
    raise GraphError("give --in FILE or --family SPEC")


def _mc_config(args) -> MCConfig:
    return MCConfig(args.trials, args.batches, seed=args.seed, workers=args.threads)


# -- subcommands -----------------------------------------------------------------


def cmd_gen(args) -> None:
    spec = parse_spec(args.spec[0] if len(args.spec) == 1 else args.spec)
    g = make(spec)
    if args.switches:
        g, trace = random_switchings(g, args.switches, args.seed)
        log.info("applied %d of %d switchings", trace.applied, trace.requested)
    _emit(to_edge_list(g), args.out)


def cmd_exact_eo(args) -> None:
    g = _load(args)
    eo = eo_count(g)
    rho = math.log(eo) / g.n if eo else -math.inf
    _show(args, ["n", "edges", "eo", "rho"], {"n": g.n, "edges": g.num_edges, "eo": eo, "rho": rho})


def cmd_mc_eo(args) -> None:
    g = _load(args)
    est = estimate(g, _mc_config(args))
    row = {
        "n": g.n,
        "edges": g.num_edges,
        "rho_hat": pauling(g.degrees),
        "rho": est.rho,
        "rho_lo": est.rho_ci[0],
        "rho_hi": est.rho_ci[1],
        "ns_per_trial": est.ns_per_trial,
    }
    if args.csv:
        _show(args, list(row), row)
        return
    row["t_mean"] = est.t_mean
    row["trials_per_sec"] = 1e9 / est.ns_per_trial if est.ns_per_trial > 0 else math.inf
    _show(args, ["n", "edges", "t_mean", "rho_hat", "rho", "rho_lo", "rho_hi", "ns_per_trial", "trials_per_sec"], row)


def cmd_trees(args) -> None:
    g = _load(args)
    tree = tree_entropy(g, exact=False)
    exact = tree_count_exact(g) if args.exact else None
    _show(
        args,
        ["n", "edges", "log_t", "tau", "t_exact"],
        {"n": g.n, "edges": g.num_edges, "log_t": tree.log_value, "tau": tree.tau, "t_exact": exact},
    )


def cmd_transfer(args) -> None:
    path = Path(args.fiber)
    if path.is_file():
        fiber, gens = read_graph(path), []
    else:
        spec = parse_spec(args.fiber)
        fiber = make(spec)
        gens = symmetry_generators(spec) if args.gens == "auto" else []
    sys_ = build(fiber, gens, matrix=not args.orbits_only)
    row = {"n": sys_.n, "orbits": sys_.n_orbits, "lambda": sys_.lam}
    row["rho_limit"] = None if sys_.lam is None else sys_.rho_limit
    _show(args, ["n", "orbits", "lambda", "rho_limit"], row)


def cmd_estimates(args) -> None:
    g = _load(args)
    opts = ReportOptions(exact=False if args.no_exact else None, mc=_mc_config(args) if args.mc else None)
    rep = report(g, opts)
    row = rep.as_row()
    _show(args, list(row), row)
    for note in rep.notes:
        log.info(note)


def cmd_rt(args) -> None:
    val = rt(args.m)
    _show(args, ["m", "rt", "log_rt"], {"m": args.m, "rt": val, "log_rt": math.log(val)})


def cmd_table(args) -> None:
    params = {k: v for k, v in (("max_m", args.max_m), ("max_d", args.max_d), ("max_n", args.max_n)) if v is not None}
    mc = _mc_config(args) if args.name == "hypercubes" and not args.no_mc else None
    rows = run_table(args.name, params, mc)
    _write_csv(args.out, TABLE_HEADERS[args.name], rows, args.full_precision)


def cmd_experiment(args) -> None:
    rows = run_experiment_corrupt(
        parse_spec(args.base), args.max_switches, args.samples, _mc_config(args), out=None, seed=args.seed
    )
    _write_csv(args.out, EXPERIMENT_HEADER, [asdict(r) for r in rows], args.full_precision)


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    common.add_argument("--threads", type=int, default=1, help="worker threads for sampling")
    common.add_argument("--csv", action="store_true", help="emit CSV instead of aligned text")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--full-precision", action="store_true", help="print floats with full precision")
    common.add_argument("-v", "--verbose", action="store_true")

    graph_in = argparse.ArgumentParser(add_help=False)
    graph_in.add_argument("--in", dest="input", help="edge-list file")
    graph_in.add_argument("--family", help="generated graph, e.g. torus:16,16")

    mc = argparse.ArgumentParser(add_help=False)
    mc.add_argument("--trials", type=int, default=10**6, help="trials per batch")
    mc.add_argument("--batches", type=int, default=1000)

    p = argparse.ArgumentParser(prog="iceentropy", description="Residual entropy of Eulerian orientations.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gen", parents=[common], help="write a generated graph as an edge list")
    s.add_argument("spec", nargs="+", help="family and parameters, e.g. torus 16 16")
    s.add_argument("--switches", type=int, default=0, help="random switchings to apply")
    s.set_defaults(func=cmd_gen)

    s = sub.add_parser("exact-eo", parents=[common, graph_in], help="exact Eulerian orientation count")
    s.set_defaults(func=cmd_exact_eo)

    s = sub.add_parser("mc-eo", parents=[common, graph_in, mc], help="Monte-Carlo residual entropy")
    s.set_defaults(func=cmd_mc_eo)

    s = sub.add_parser("trees", parents=[common, graph_in], help="spanning-tree entropy")
    s.add_argument("--exact", action="store_true", help="also compute the exact integer count")
    s.set_defaults(func=cmd_trees)

    s = sub.add_parser("transfer", parents=[common], help="transfer-matrix limit for fiber x long cycle")
    s.add_argument("--fiber", required=True, help="family spec or edge-list file")
    s.add_argument("--gens", choices=["auto", "none"], default="auto")
    s.add_argument("--orbits-only", action="store_true", help="count orbits without building the matrix")
    s.set_defaults(func=cmd_transfer)

    s = sub.add_parser("estimates", parents=[common, graph_in, mc], help="all estimates and bounds")
    s.add_argument("--mc", action="store_true", help="sample rho when the exact count is out of reach")
    s.add_argument("--no-exact", action="store_true", help="skip the exact count")
    s.set_defaults(func=cmd_estimates)

    s = sub.add_parser("rt", parents=[common], help="number of regular tournaments")
    s.add_argument("m", type=int)
    s.set_defaults(func=cmd_rt)

    s = sub.add_parser("table", parents=[common, mc], help="reproduce a reference table as CSV")
    s.add_argument("name", choices=sorted(TABLE_HEADERS))
    s.add_argument("--max-m", type=int)
    s.add_argument("--max-d", type=int)
    s.add_argument("--max-n", type=int, help="largest fiber for the three-cycles matrix")
    s.add_argument("--no-mc", action="store_true", help="hypercubes: skip the sampled rho column")
    s.set_defaults(func=cmd_table)

    s = sub.add_parser("experiment", parents=[common, mc], help="rho vs tau under random switchings")
    s.add_argument("--base", default="torus:40,40")
    s.add_argument("--max-switches", type=int, default=10000)
    s.add_argument("--samples", type=int, default=25)
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        args.func(args)
    except IceEntropyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
