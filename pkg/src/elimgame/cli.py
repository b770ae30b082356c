"""Command-line entry point.

Subcommands emit CSV (curves) or JSON (reports) and write a run manifest
next to their output so the run can be replayed with ``elimgame replay``.
Exit status: 0 success, 1 verification/convergence failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time

import numpy as np

from . import __version__, analytic, montecarlo, response, solver
from .engine import GameConfig

SEED_ENV = "ELIMGAME_SEED"


def _fmt(v) -> str:
    if v is None or (isinstance(v, float) and np.isnan(v)):
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return "%.17g" % v


def _write_csv(path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    _emit(path, buf.getvalue())


def _write_json(path, obj):
    _emit(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _emit(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _json_safe(x):
    if isinstance(x, float) and not np.isfinite(x):
        return None if np.isnan(x) else ("inf" if x > 0 else "-inf")
    return x


# -- subcommands -----------------------------------------------------------

def cmd_density(args):
    eq = analytic.make_equilibrium(args.n)
    xs = np.linspace(0.0, 1.0, args.points)
    fs = analytic.density(eq, xs)
    _write_csv(args.out, ["x", "f_star"], zip(xs, fs))
    return 0


def cmd_scaling(args):
    xi = np.linspace(args.xi_min, 0.0, args.points)
    cols = [analytic.rescaled_density(analytic.make_equilibrium(n), xi) for n in args.n_list]
    limit = analytic.scaling_density(xi)
    header = ["xi"] + [f"N={n}" for n in args.n_list] + ["limit"]
    _write_csv(args.out, header, zip(xi, *cols, limit))
    return 0


def cmd_verify(args):
    eq = analytic.make_equilibrium(args.n)
    f = response.NashStrategy(eq, scale=1.0 + args.perturb)
    report = response.verify_equilibrium(
        GameConfig(args.n), f, eq.support_edge, args.grid,
        indifference_tol=args.indifference_tol,
    )
    out = {k: _json_safe(v) for k, v in report.to_dict().items()}
    out.update(grid=args.grid, perturb=args.perturb)
    _write_json(args.out, out)
    return 0 if report.passed else 1


def cmd_solve(args):
    f, report = solver.solve(args.n, args.bins, args.max_iter, args.tol,
                             do_refine=not args.no_refine)
    _write_csv(args.out, ["x", "weight", "density"],
               zip(f.grid, f.weights, f.density()))
    report_path = args.report
    if report_path is None and args.out not in (None, "-"):
        report_path = args.out + ".report.json"
    if report_path is None:
        sys.stderr.write(json.dumps(report.to_dict(), sort_keys=True) + "\n")
    else:
        _write_json(report_path, report.to_dict())
    return 0 if report.converged else 1


def cmd_simulate(args):
    n = args.n
    eq = analytic.make_equilibrium(n)
    nash = response.NashStrategy(eq)
    strategies = [nash] * n
    if args.deviate is not None:
        strategies[0] = response.PureStrategy(args.deviate)
    cfg = montecarlo.TournamentConfig(GameConfig(n, seed=args.seed), args.rounds, strategies)
    est = montecarlo.run_tournament(cfg, workers=args.threads)
    out = est.to_dict()
    out.update(n_players=n, seed=args.seed, deviate=args.deviate,
               elimination_rate=est.elimination_rate.tolist(), v_star=eq.v_star)
    _write_json(args.out, out)
    return 0


def cmd_replay(args):
    with open(args.manifest, encoding="utf-8") as fh:
        manifest = json.load(fh)
    argv = list(manifest["argv"])
    if args.out is not None:
        argv = _replace_flag(argv, "--out", args.out)
        if "--report" in argv:
            argv = _replace_flag(argv, "--report", args.out + ".report.json")
        if args.manifest_out is None:
            argv = _drop_flag(argv, "--manifest")
    if args.manifest_out is not None:
        argv = _replace_flag(argv, "--manifest", args.manifest_out)
    return main(argv)


def _drop_flag(argv, flag):
    argv = list(argv)
    if flag in argv:
        i = argv.index(flag)
        del argv[i:i + 2]
    return argv


def _replace_flag(argv, flag, value):
    argv = list(argv)
    if flag in argv:
        argv[argv.index(flag) + 1] = value
    else:
        argv += [flag, value]
    return argv


# -- argument parsing ------------------------------------------------------

def _int_at_least(lo):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v
    return parse


def _unit_float(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {v}")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _negative_float(text):
    v = float(text)
    if not v < 0:
        raise argparse.ArgumentTypeError(f"must be negative, got {v}")
    return v


def _n_list(text):
    try:
        ns = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad player list {text!r}")
    if not ns or min(ns) < 2:
        raise argparse.ArgumentTypeError("every N must be >= 2")
    return ns


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    return int(raw) if raw else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="elimgame", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
        sp.add_argument("--manifest", default=None,
                        help="manifest path (default: <out>.manifest.json)")

    sp = sub.add_parser("density", help="equilibrium density on a uniform grid")
    sp.add_argument("--n", type=_int_at_least(2), required=True)
    sp.add_argument("--points", type=_int_at_least(2), default=201)
    common(sp)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("scaling", help="rescaled densities against the large-N limit")
    sp.add_argument("--n-list", type=_n_list, default=[2, 5, 10, 20])
    sp.add_argument("--xi-min", type=_negative_float, default=-10.0)
    sp.add_argument("--points", type=_int_at_least(2), default=201)
    common(sp)
    sp.set_defaults(func=cmd_scaling)

    sp = sub.add_parser("verify", help="check indifference and the out-of-support deficit")
    sp.add_argument("--n", type=_int_at_least(2), required=True)
    sp.add_argument("--grid", type=_int_at_least(16), default=512)
    sp.add_argument("--format", choices=["json"], default="json")
    sp.add_argument("--perturb", type=float, default=0.0,
                    help="scale the density by 1+perturb (produces a non-strategy)")
    sp.add_argument("--indifference-tol", type=_positive_float, default=1e-5)
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("solve", help="numerical equilibrium on a binned strategy space")
    sp.add_argument("--n", type=_int_at_least(2), required=True)
    sp.add_argument("--bins", type=_int_at_least(solver.MIN_BINS), default=2048)
    sp.add_argument("--tol", type=_positive_float, default=5e-3)
    sp.add_argument("--max-iter", type=_int_at_least(1), default=200_000)
    sp.add_argument("--no-refine", action="store_true",
                    help="stop after fictitious play")
    sp.add_argument("--report", default=None, help="report path (default: <out>.report.json)")
    common(sp)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("simulate", help="Monte Carlo tournament at the equilibrium")
    sp.add_argument("--n", type=_int_at_least(2), required=True)
    sp.add_argument("--rounds", type=_int_at_least(1), default=1_000_000)
    sp.add_argument("--seed", type=_int_at_least(0), default=None,
                    help=f"RNG seed (default: ${SEED_ENV} or 0)")
    sp.add_argument("--deviate", type=_unit_float, default=None,
                    help="pin player 1 to this pure strategy")
    sp.add_argument("--threads", type=_int_at_least(1), default=1)
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out", default=None, help="redirect the primary output")
    sp.add_argument("--manifest-out", default=None)
    sp.set_defaults(func=cmd_replay)
    return p


def _canonical_argv(args) -> list[str]:
    argv = [args.command]
    for key, val in sorted(vars(args).items()):
        if key in ("func", "command") or val is None:
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        elif isinstance(val, list):
            argv += [flag, ",".join(str(v) for v in val)]
        else:
            argv += [flag, repr(val) if isinstance(val, float) else str(val)]
    return argv


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "replay":
        return args.func(args)
    if getattr(args, "seed", "absent") is None:
        args.seed = _default_seed()
    start = time.perf_counter()
    status = args.func(args)
    manifest = {
        "command": args.command,
        "params": {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "command")},
        "argv": _canonical_argv(args),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "wall_time_s": time.perf_counter() - start,
        "exit_status": status,
    }
    path = args.manifest
    if path is None and args.out not in (None, "-"):
        path = args.out + ".manifest.json"
    if path is None:
        sys.stderr.write(json.dumps(manifest, sort_keys=True) + "\n")
    else:
        _write_json(path, manifest)
    return status


if __name__ == "__main__":
    sys.exit(main())
