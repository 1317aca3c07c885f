"""Command-line surface tying the pipeline together.

One subcommand per invocation. Exit codes: 0 success, 1 usage error,
2 numerical or convergence failure, 3 I/O error. Solve paths always
compute certificates; a failed certificate downgrades the exit code only
under ``--strict``, because a marginal solve is still data. All writes go
to paths derived from ``--out``.
"""

import argparse
import json
import sys

import numpy as np

from .certify import (
    check_entry_bounds,
    check_kkt,
    check_rank_relation,
    check_regmod_trace,
    check_trace_bounds,
    combine_reports,
)
from .dual_solver import SolverOptions, solve_dual
from .embedding import ase, embed_from_p
from .errors import (
    ConfigError,
    DomainError,
    InputError,
    ModelViolationError,
    NumericalError,
    ParseError,
)
from .fileio import (
    load_graph,
    load_matrix,
    write_edgelist,
    write_matrix_csv,
)
from .graphs import (
    BallsConfig,
    DEFAULT_BLOCK_MATRIX,
    DEFAULT_BLOCK_SIZES,
    Graph,
    SphereCapsConfig,
    gen_balls,
    gen_sbm,
    gen_sphere_caps,
    karate,
    prob_from_latent,
    sample_rdpg,
)
from .recovery import duality_gap, recover_primal
from .regmod_solver import RegModOptions, solve_regmod
from .sweep import SweepConfig, run_sweep, select_c

__all__ = ["main"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with its own codes; route everything through main()
    def error(self, message):
        raise _UsageError(message)


def _read_labels(path):
    labels = np.loadtxt(path, delimiter=",", ndmin=1)
    return np.asarray(labels, dtype=int)


def _write_labels(labels, path):
    np.savetxt(path, np.asarray(labels, dtype=int), fmt="%d")


def _solver_options(args, trace_penalty):
    kwargs = {"trace_penalty": trace_penalty}
    if args.tol is not None:
        kwargs["tol"] = args.tol
    if args.max_iter is not None:
        kwargs["max_iter"] = args.max_iter
    return SolverOptions(**kwargs)


def _full_report(p, q, graph, c, tau):
    return combine_reports(
        check_entry_bounds(p, q, graph, c),
        check_trace_bounds(p, graph, c),
        check_kkt(p, q, graph, c),
        check_rank_relation(p, q, graph, c, tau=tau),
    )


def _write_report(report, path):
    with open(path, "w") as fh:
        json.dump(report.as_dict(), fh, indent=2)
        fh.write("\n")


def _cmd_generate(args):
    if args.n is not None and args.n < 1:
        raise InputError(f"need n >= 1, got {args.n}")
    seed = args.seed or 0
    latent = None
    if args.model == "sbm":
        if args.sizes is not None:
            sizes = args.sizes
        elif args.n is None:
            sizes = DEFAULT_BLOCK_SIZES
        else:
            # scale the default block proportions to the requested size
            base = np.asarray(DEFAULT_BLOCK_SIZES, dtype=float)
            sizes = np.maximum(
                1, np.round(base * args.n / base.sum()).astype(int)
            )
            sizes[-1] += args.n - sizes.sum()
            if sizes[-1] < 1:
                raise InputError(f"n={args.n} too small for three blocks")
            sizes = tuple(int(s) for s in sizes)
        p, labels = gen_sbm(sizes=sizes)
        w, v = np.linalg.eigh(DEFAULT_BLOCK_MATRIX)
        block_latent = v * np.sqrt(np.clip(w, 0.0, None))
        latent = block_latent[labels]
    elif args.model == "caps":
        cfg = SphereCapsConfig(n=args.n if args.n is not None else 50,
                               seed=seed)
        latent, labels = gen_sphere_caps(cfg)
        p = prob_from_latent(latent)
    else:
        cfg = BallsConfig(n=args.n if args.n is not None else 50, seed=seed)
        latent, labels = gen_balls(cfg)
        p = prob_from_latent(latent)
    write_matrix_csv(p, args.out)
    if args.latent_out:
        write_matrix_csv(latent, args.latent_out)
    if args.labels_out:
        _write_labels(labels, args.labels_out)
    print(f"model={args.model} n={p.shape[0]} out={args.out}")
    return 0


def _cmd_sample(args):
    p = load_matrix(args.p)
    graph = sample_rdpg(p, seed=args.seed or 0)
    write_edgelist(graph, args.out)
    print(f"n={graph.n} m={graph.m} out={args.out}")
    return 0


def _solve_summary(c, prim, sol):
    gap = duality_gap(prim, sol)
    return f"C={c:g} d*={prim.rank} gap={gap:.6e} obj={sol.objective!r}"


def _cmd_solve(args):
    graph = load_graph(args.graph)
    sol = solve_dual(graph, _solver_options(args, args.c))
    prim = recover_primal(sol.matrix, graph, args.c, rank_tol=args.tau)
    report = _full_report(prim.matrix, sol.matrix, graph, args.c, args.tau)
    if args.out:
        write_matrix_csv(prim.matrix, f"{args.out}_pstar.csv")
        write_matrix_csv(sol.matrix, f"{args.out}_qstar.csv")
        _write_report(report, f"{args.out}_certificate.json")
    print(_solve_summary(args.c, prim, sol))
    if not sol.converged:
        print(f"warning: solver status {sol.status}", file=sys.stderr)
        return 2
    if args.strict and not report.overall:
        print("warning: certificate failed", file=sys.stderr)
        return 2
    return 0


def _cmd_solve_mod(args):
    graph = load_graph(args.graph)
    kwargs = {"trace_penalty": args.c, "rank_tol": args.tau}
    if args.tol is not None:
        kwargs["tol"] = args.tol
    if args.max_iter is not None:
        kwargs["max_iter"] = args.max_iter
    prim = solve_regmod(graph, RegModOptions(**kwargs))
    report = combine_reports(
        check_trace_bounds(prim.matrix, graph, args.c),
        check_regmod_trace(prim.matrix, graph, args.c),
    )
    if args.out:
        write_matrix_csv(prim.matrix, f"{args.out}_pstar.csv")
        _write_report(report, f"{args.out}_certificate.json")
    print(f"C={args.c:g} d*={prim.rank} obj={prim.objective!r} "
          f"trace={np.trace(prim.matrix):.6f}")
    if not prim.converged:
        print(f"warning: solver status {prim.status}", file=sys.stderr)
        return 2
    if args.strict and not report.overall:
        print("warning: certificate failed", file=sys.stderr)
        return 2
    return 0


def _cmd_ase(args):
    graph = load_graph(args.graph)
    emb = ase(graph.adjacency().astype(float), args.d)
    write_matrix_csv(emb.x, args.out)
    print(f"n={graph.n} d={args.d} out={args.out}")
    return 0


def _cmd_embed(args):
    p = load_matrix(args.p)
    emb = embed_from_p(p, args.k)
    write_matrix_csv(emb.x, args.out)
    print(f"n={p.shape[0]} k={args.k} out={args.out}")
    return 0


def _parse_grid(text):
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(
            f"grid must be start:stop:step, got {text!r}"
        )
    try:
        a, b, step = (float(t) for t in parts)
    except ValueError:
        raise InputError(f"grid values must be numeric, got {text!r}")
    if step <= 0 or a <= 0 or b < a:
        raise InputError(
            f"grid needs positive start, stop >= start, positive step, "
            f"got {text!r}"
        )
    return tuple(float(c) for c in np.arange(a, b + step / 2.0, step))


def _cmd_sweep(args):
    if (args.p is None) == (args.graph is None):
        raise InputError("pass exactly one of --p or --graph")
    target = load_matrix(args.p) if args.p else load_graph(args.graph)
    labels = _read_labels(args.labels) if args.labels else None
    config = SweepConfig(
        c_grid=_parse_grid(args.c_grid),
        replicates=args.replicates,
        base_seed=args.seed or 0,
        rank_tol=args.tau,
        jobs=args.jobs,
        output_path=args.out,
    )
    records = run_sweep(target, config, labels=labels)
    ok = [r for r in records if not r.failed]
    print(f"rows={len(records)} failed={len(records) - len(ok)} "
          f"out={args.out}")
    if not ok:
        print("error: every cell failed", file=sys.stderr)
        return 2
    best = select_c(records, "empirical_squared")
    print(f"best_c={best:g} criterion=empirical_squared")
    return 0


def _cmd_certify(args):
    p = load_matrix(args.p)
    q = load_matrix(args.q)
    graph = load_graph(args.graph)
    if p.shape[0] != graph.n or q.shape[0] != graph.n:
        raise InputError(
            f"matrix sizes {p.shape[0]}, {q.shape[0]} do not match "
            f"graph size {graph.n}"
        )
    report = _full_report(p, q, graph, args.c, args.tau)
    if args.out:
        _write_report(report, args.out)
    else:
        json.dump(report.as_dict(), sys.stdout, indent=2)
        print()
    print(f"pass={'true' if report.overall else 'false'}")
    if args.strict and not report.overall:
        return 2
    return 0


def _cmd_karate(args):
    if args.c <= 0:
        raise InputError(f"penalty must be positive, got {args.c}")
    graph, labels = karate()
    sol = solve_dual(graph, _solver_options(args, args.c))
    prim = recover_primal(sol.matrix, graph, args.c, rank_tol=args.tau)
    emb = embed_from_p(prim.matrix, 2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("x1,x2,label\n")
            for row, lab in zip(emb.x, labels):
                fh.write(f"{float(row[0])!r},{float(row[1])!r},{int(lab)}\n")
    print(_solve_summary(args.c, prim, sol))
    if not sol.converged:
        print(f"warning: solver status {sol.status}", file=sys.stderr)
        return 2
    return 0


def _add_common(sub, seed=False, out_required=False, out=True):
    if seed:
        sub.add_argument("--seed", type=int, default=0)
    if out:
        sub.add_argument("--out", required=out_required)
    sub.add_argument("--tau", type=float, default=1e-3,
                     help="eigenvalue threshold for the reported rank")
    sub.add_argument("--tol", type=float, default=None)
    sub.add_argument("--max-iter", type=int, default=None)
    sub.add_argument("--strict", action="store_true",
                     help="fail the exit code on certificate failures")


def build_parser():
    parser = _Parser(prog="rdpgmap",
                     description="Latent probability matrix inference "
                                 "for random dot product graphs.")
    subs = parser.add_subparsers(dest="command", required=True)

    sub = subs.add_parser("generate", help="emit a probability matrix")
    sub.add_argument("--model", choices=("sbm", "caps", "balls"),
                     required=True)
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--sizes", type=lambda s: tuple(
        int(t) for t in s.split(",")), default=None,
        help="sbm block sizes, comma separated")
    sub.add_argument("--latent-out", default=None)
    sub.add_argument("--labels-out", default=None)
    _add_common(sub, seed=True, out_required=True)
    sub.set_defaults(func=_cmd_generate)

    sub = subs.add_parser("sample", help="sample a graph from a matrix")
    sub.add_argument("--p", required=True)
    _add_common(sub, seed=True, out_required=True)
    sub.set_defaults(func=_cmd_sample)

    sub = subs.add_parser("solve", help="dual solve, recovery, certificate")
    sub.add_argument("--graph", required=True)
    sub.add_argument("--c", type=float, required=True)
    _add_common(sub)
    sub.set_defaults(func=_cmd_solve)

    sub = subs.add_parser("solve-mod",
                          help="box-constrained variant with trace bounds")
    sub.add_argument("--graph", required=True)
    sub.add_argument("--c", type=float, required=True)
    _add_common(sub)
    sub.set_defaults(func=_cmd_solve_mod)

    sub = subs.add_parser("ase", help="adjacency spectral embedding")
    sub.add_argument("--graph", required=True)
    sub.add_argument("--d", type=int, required=True)
    _add_common(sub, out_required=True)
    sub.set_defaults(func=_cmd_ase)

    sub = subs.add_parser("embed", help="embedding from a matrix")
    sub.add_argument("--p", required=True)
    sub.add_argument("--k", type=int, required=True)
    _add_common(sub, out_required=True)
    sub.set_defaults(func=_cmd_embed)

    sub = subs.add_parser("sweep", help="penalty grid with replicates")
    sub.add_argument("--p", default=None)
    sub.add_argument("--graph", default=None)
    sub.add_argument("--c-grid", default="2:25:1",
                     help="start:stop:step, inclusive")
    sub.add_argument("--replicates", type=int, default=1)
    sub.add_argument("--jobs", type=int, default=1)
    sub.add_argument("--labels", default=None)
    _add_common(sub, seed=True, out_required=True)
    sub.set_defaults(func=_cmd_sweep)

    sub = subs.add_parser("certify", help="standalone certificate")
    sub.add_argument("--p", required=True)
    sub.add_argument("--q", required=True)
    sub.add_argument("--graph", required=True)
    sub.add_argument("--c", type=float, required=True)
    _add_common(sub)
    sub.set_defaults(func=_cmd_certify)

    sub = subs.add_parser("karate", help="bundled graph, solve and embed")
    sub.add_argument("--c", type=float, required=True)
    _add_common(sub)
    sub.set_defaults(func=_cmd_karate)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (InputError, ConfigError, DomainError, ParseError,
            ModelViolationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 3
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
