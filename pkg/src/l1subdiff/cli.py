"""Command line front end: ``l1subdiff temporal|spatial|trace|verify-weights|verify-mesh``."""

import argparse
import logging
import math
import random
import sys
import warnings

from . import harness
from .frackernel import primary_weight, secondary_weight, weight_oracle, weight_rows
from .mesh import build_graded_mesh, check_mesh_properties


def _common(p):
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, action="append", help="grading exponent (repeatable)")
    p.add_argument("--nt", type=int, action="append", help="time subintervals N (repeatable)")
    p.add_argument("--mx", type=int, action="append", help="space elements M (repeatable)")
    p.add_argument("--scheme", choices=["l1", "gcn"], default="l1")
    p.add_argument("--terms", type=int, default=60, help="series truncation")
    p.add_argument("--out", help="CSV output path")
    p.add_argument("--initial", choices=["ritz", "l2"], default="ritz", help="projection used for U^0")


def build_parser():
    parser = argparse.ArgumentParser(prog="l1subdiff", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("temporal", "spatial"):
        p = sub.add_parser(name, help=f"{name} convergence study")
        _common(p)
        p.add_argument("--strict", action="store_true", help="exit nonzero on a dominance warning")
        p.add_argument("--no-dominance-check", action="store_true")
        p.add_argument("--finest", type=int, help="element count of the mesh carrying the error quadrature")
        p.add_argument("--include-initial", action="store_true", help="let n = 0 enter the max over time levels")
        p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("trace", help="error as a function of t_n")
    _common(p)

    p = sub.add_parser("verify-weights", help="closed-form weights against adaptive quadrature")
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-11)

    p = sub.add_parser("verify-mesh", help="graded mesh inequalities over random (gamma, N)")
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _study(args, kind):
    defaults = {"temporal": ([20, 40, 80, 160, 320], [1200]), "spatial": ([640], [10, 20, 40, 80, 160])}
    Ns, Ms = defaults[kind]
    gammas = args.gamma or [max(1.0, 2.0 / (args.alpha / 4 + args.alpha))]
    config = harness.StudyConfig(
        alpha=args.alpha,
        gammas=gammas,
        Ns=args.nt or Ns,
        Ms=args.mx or Ms,
        scheme=args.scheme,
        out=args.out,
        n_terms=args.terms,
        initial=args.initial,
        include_initial=args.include_initial,
        finest=args.finest,
        check_dominance=not args.no_dominance_check,
        workers=args.workers,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", harness.DominanceWarning)
        result = harness.temporal_study(config) if kind == "temporal" else harness.spatial_study(config)
    sys.stdout.write(harness.format_table(result.rows))
    for msg in result.warnings:
        sys.stderr.write(f"warning: {msg}\n")
    return 1 if (args.strict and result.warnings) else 0


def _trace(args):
    gamma = (args.gamma or [1.0])[0]
    N = (args.nt or [160])[0]
    M = (args.mx or [1200])[0]
    pts = harness.error_trace(args.alpha, gamma, N, M, scheme=args.scheme, n_terms=args.terms, initial=args.initial)
    text = harness.trace_csv(args.alpha, gamma, N, M, [p[0] for p in pts], [p[1] for p in pts])
    if args.out:
        with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _verify_weights(args):
    rng = random.Random(args.seed)
    worst = 0.0
    worst_tel = 0.0
    for _ in range(args.samples):
        gamma = rng.uniform(1.0, 4.0)
        N = rng.randint(1, 64)
        alpha = rng.uniform(0.05, 1.0)
        n = rng.randint(1, N)
        j = rng.randint(1, n)
        mesh = build_graded_mesh(1.0, N, gamma)
        w, wh = weight_oracle(mesh, alpha, n, j)
        worst = max(worst, abs(w - primary_weight(mesh, alpha, n, j)), abs(wh - secondary_weight(mesh, alpha, n, j)))
        row = weight_rows(mesh, alpha, n)[0]
        target = mesh.nodes[n] ** alpha / math.gamma(alpha + 1)
        worst_tel = max(worst_tel, abs(math.fsum(row) - target) / target)
    ok = worst <= args.tol and worst_tel <= 1e-12
    print(f"max |closed form - quadrature| = {worst:.3e} (tol {args.tol:.0e})")
    print(f"max telescoping relative error  = {worst_tel:.3e} (tol 1e-12)")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def _verify_mesh(args):
    rng = random.Random(args.seed)
    bad = 0
    for _ in range(args.samples):
        gamma = rng.uniform(1.0, 5.0)
        N = rng.randint(2, 2000)
        report = check_mesh_properties(build_graded_mesh(1.0, N, gamma))
        if not report.ok:
            bad += 1
            print(f"gamma={gamma:.6f} N={N}: violations at {report.violations[:10]}")
    print(f"{args.samples - bad}/{args.samples} meshes satisfy both inequalities")
    return 0 if bad == 0 else 1


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command in ("temporal", "spatial"):
        return _study(args, args.command)
    if args.command == "trace":
        return _trace(args)
    if args.command == "verify-weights":
        return _verify_weights(args)
    return _verify_mesh(args)


if __name__ == "__main__":
    sys.exit(main())
