"""Command line entry point.

Exit status: 0 on success, 1 when the computation or an input file is
rejected, 2 on usage errors.  Artifacts go to ``--out`` or, when that is not
given, to ``$LOEWNERKIT_OUT`` (default: the current directory).
"""

import argparse
import os
import sys

import numpy as np

from . import __version__
from .analysis import estimate_sqrt_asymptote, measure_tail_geometry, regularity
from .errors import ArgumentError, LoewnerError
from .explicit import params_from_kappa, trace_explicit
from .forward import SolverConfig, solve_trace
from .inverse import drive_curve
from .io import (read_curve, read_driving, read_json, write_curve, write_driving, write_json,
                 write_trace)
from .spiral import SATURATION_U, CompactSet, build_spiral, spiral_driving
from .svg import write_svg

ENV_OUT = "LOEWNERKIT_OUT"


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default ${ENV_OUT} or .)")
    common.add_argument("--svg", action="store_true", help="also write SVG plots")

    p = argparse.ArgumentParser(prog="loewnerkit",
                                description="Chordal Loewner evolution toolkit.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("exact", parents=[common], help="self-similar family of kappa*sqrt(1-t)")
    q.add_argument("--kappa", type=float, required=True)
    q.add_argument("--samples", type=int, default=1000)
    q.add_argument("--smax", type=float, default=20.0, help="last log-time sample")

    q = sub.add_parser("trace", parents=[common], help="forward solve a driving CSV")
    q.add_argument("--driving", required=True)
    q.add_argument("--steps", type=int, default=1024)
    q.add_argument("--grid", choices=("uniform_t", "geometric_s"), default="uniform_t")
    q.add_argument("--tail-fraction", type=float, default=0.5)

    q = sub.add_parser("drive", parents=[common], help="unzip a curve CSV")
    q.add_argument("--curve", required=True)
    q.add_argument("--tol", type=float, default=1e-10)

    q = sub.add_parser("spiral", parents=[common], help="spiral around a disk or segment")
    q.add_argument("--set", dest="set_path", required=True)
    q.add_argument("--tmax", type=float, default=1.0 - 2.0 ** -16)
    q.add_argument("--samples", type=int, default=8000)
    q.add_argument("--horizon", choices=("capacity", "curve"), default="capacity")

    q = sub.add_parser("analyze", parents=[common], help="asymptotic analysis of a driving CSV")
    q.add_argument("--driving", required=True)
    q.add_argument("--a", type=float, default=0.5)
    q.add_argument("--levels", type=int, default=40)
    q.add_argument("--deltas", type=float, nargs="+", default=[0.04, 0.01, 0.0025])
    q.add_argument("--steps", type=int, default=0,
                   help="if positive, also solve the trace on a geometric_s grid and "
                        "measure its tail geometry")

    q = sub.add_parser("selftest", help="run the acceptance checks")
    q.add_argument("--only", type=int, nargs="+", choices=range(1, 10), metavar="N")
    return p


def _outdir(args):
    d = args.out or os.environ.get(ENV_OUT) or "."
    os.makedirs(d, exist_ok=True)
    return d


def _flags(args):
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "svg")}


def _cmd_exact(args, out):
    if args.samples < 2:
        raise ArgumentError("--samples must be at least 2")
    p = params_from_kappa(args.kappa)
    s = np.linspace(0.0, args.smax, args.samples)
    tr = trace_explicit(p, s)
    write_json(os.path.join(out, "exact_params.json"), {"flags": _flags(args), **p.as_dict()})
    write_trace(os.path.join(out, "exact_trace.csv"), tr)
    if args.svg:
        write_svg(os.path.join(out, "exact_trace.svg"), [tr.z], title=f"kappa={args.kappa:g}")


def _cmd_trace(args, out):
    lam = read_driving(args.driving)
    cfg = SolverConfig(args.steps, args.grid, args.tail_fraction)
    tr = solve_trace(lam, cfg)
    write_trace(os.path.join(out, "trace.csv"), tr)
    write_json(os.path.join(out, "trace.json"),
               {"flags": _flags(args), "samples": len(tr), "final": tr.z[-1],
                "total_capacity": lam.total_capacity})
    if args.svg:
        write_svg(os.path.join(out, "trace.svg"), [tr.z], title="trace")


def _cmd_drive(args, out):
    c = read_curve(args.curve)
    lam = drive_curve(c, args.tol)
    write_driving(os.path.join(out, "driving.csv"), lam)
    write_json(os.path.join(out, "drive.json"),
               {"flags": _flags(args), "samples": len(lam),
                "total_capacity": lam.total_capacity})
    if args.svg:
        write_svg(os.path.join(out, "driving.svg"), [lam.t + 1j * lam.values],
                  title="driving term", real_axis=False, equal_aspect=False)


def _cmd_spiral(args, out):
    A = CompactSet.from_dict(read_json(args.set_path))
    t_curve = args.tmax if args.horizon == "curve" else 1.0 - 1.0 / SATURATION_U
    sp = build_spiral(A, t_curve, args.samples)
    lam = spiral_driving(A, args.tmax, args.samples, args.horizon)
    write_curve(os.path.join(out, "spiral_curve.csv"), sp.samples)
    write_driving(os.path.join(out, "spiral_driving.csv"), lam)
    write_json(os.path.join(out, "spiral.json"),
               {"flags": _flags(args), "set": A.as_dict(), "t0": sp.t0,
                "rotation": sp.rotation, "turns": float(sp.winding()[-1]),
                "driving_samples": len(lam), "driving_capacity": lam.total_capacity})
    if args.svg:
        write_svg(os.path.join(out, "spiral_curve.svg"), [sp.samples.points], title="spiral")


def _cmd_analyze(args, out):
    lam = read_driving(args.driving)
    rep = estimate_sqrt_asymptote(lam, args.a, args.levels)
    reg = regularity(lam, args.deltas, horizon=1.0)
    doc = {"flags": _flags(args), **rep.as_dict(), **reg.as_dict()}
    if args.steps > 0:
        tr = solve_trace(lam, SolverConfig(args.steps, "geometric_s"))
        geo = measure_tail_geometry(tr, rep.kappa_limit, horizon=1.0)
        doc.update(geo.as_dict())
        if args.svg:
            write_svg(os.path.join(out, "analyze_trace.svg"), [tr.z], title="trace")
    write_json(os.path.join(out, "report.json"), doc)
    if args.svg:
        t, k = zip(*rep.kappa_hats)
        pts = -np.log1p(-np.array(t)) + 1j * np.array(k)
        write_svg(os.path.join(out, "kappa_hats.svg"), [pts], title="kappa estimates",
                  real_axis=False, equal_aspect=False)


def _cmd_selftest(args):
    from .acceptance import run_checks
    results = run_checks(args.only, log=print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


COMMANDS = {"exact": _cmd_exact, "trace": _cmd_trace, "drive": _cmd_drive,
            "spiral": _cmd_spiral, "analyze": _cmd_analyze}


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        if args.command == "selftest":
            return _cmd_selftest(args)
        COMMANDS[args.command](args, _outdir(args))
    except (LoewnerError, OSError) as exc:
        print(f"loewnerkit {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
