"""
Command-line interface.

    beurling norm FILE
    beurling invert FILE --delta D [--out DIR]
    beurling bezout FILE1 FILE2 [--delta D] [--out DIR]
    beurling diagnose {outer,growth,u,membership,delta-lambda} ...

Exit status: 0 success, 1 usage or unreadable input, 2 a mathematical
precondition fails, 3 a tolerance or convergence target is missed.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import corona, diagnostics, inversion
from .errors import ConvergenceError, PreconditionError, SeriesFormatError
from .series import Series2D, Weight, dumps_series, read_series, weighted_norm

EXIT_OK, EXIT_USAGE, EXIT_PRECONDITION, EXIT_TOLERANCE = 0, 1, 2, 3

log = logging.getLogger("beurling")


@dataclass(frozen=True)
class RunConfig:
    """Numerical defaults shared by the subcommands."""

    weight: Weight = Weight(0.5, 0.5)
    tol: float = 1e-8
    grid_n: int = 256
    radial_nodes: int = 64
    seed: int = 0
    output_dir: Path | None = None

    def __post_init__(self):
        if self.grid_n < 4 or self.grid_n & (self.grid_n - 1):
            raise ValueError(f"--grid must be a power of two >= 4, got {self.grid_n}")
        if not self.tol > 0:
            raise ValueError("--tol must be positive")
        if self.radial_nodes < 4:
            raise ValueError("--radial-nodes must be at least 4")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common(p, tol=None, grid=None, radial=None):
    p.add_argument("--alpha", type=float, default=None,
                   help="weight exponent in z (default: from the input file, else 0.5)")
    p.add_argument("--beta", type=float, default=None,
                   help="weight exponent in w (default: from the input file, else 0.5)")
    p.add_argument("--tol", type=float, default=tol, help=f"target tolerance (default {tol})")
    p.add_argument("--grid", type=int, default=grid, help=f"angular grid size, power of two (default {grid})")
    p.add_argument("--radial-nodes", type=int, default=radial,
                   help=f"Gauss-Legendre nodes in r (default {radial})")
    p.add_argument("--seed", type=int, default=0, help="seed for randomised inputs (default 0)")
    p.add_argument("--out", type=Path, default=None, help="output directory (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = _Parser(prog="beurling", description="Weighted Beurling algebra toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("norm", help="weighted l1 norm of a coefficient file")
    p.add_argument("file", type=Path)
    _common(p)

    p = sub.add_parser("invert", help="certified inverse of a coefficient file")
    p.add_argument("file", type=Path)
    p.add_argument("--delta", type=float, required=True, help="lower bound for |f| on the torus")
    p.add_argument("--max-terms", type=int, default=200)
    _common(p, tol=1e-8, grid=256)

    p = sub.add_parser("bezout", help="solve f1 h1 + f2 h2 = 1")
    p.add_argument("file1", type=Path)
    p.add_argument("file2", type=Path)
    p.add_argument("--delta", type=float, default=None,
                   help="lower bound for (|f1|^2+|f2|^2)^(1/2); estimated when omitted")
    _common(p, tol=1e-8, grid=256, radial=32)

    p = sub.add_parser("diagnose", help="ideal diagnostics")
    dsub = p.add_subparsers(dest="target", required=True, parser_class=_Parser)

    q = dsub.add_parser("outer", help="radial profile (1-r) log|f(r, w)|")
    q.add_argument("file", type=Path)
    q.add_argument("--w-point", type=complex, action="append", default=None,
                   help="w value (repeatable); default: five seeded random points of the closed disc")
    q.add_argument("--levels", type=int, default=12, help="radii 1 - 2^-k for k = 1..levels")
    _common(q)

    q = dsub.add_parser("growth", help="growth bound 1/|f| <= exp(M / (1 - |z|))")
    q.add_argument("file", type=Path, nargs="?", default=None)
    q.add_argument("--random", type=int, default=0,
                   help="also check this many seeded random nonvanishing functions")
    _common(q, grid=64)

    q = dsub.add_parser("u", help="comparability, image and identities of u")
    _common(q, grid=128)

    q = dsub.add_parser("membership", help="weighted fourth-derivative integral")
    q.add_argument("file", type=Path, nargs="?", default=None, help="Series file; default u^2")
    q.add_argument("--eps", type=float, default=0.5)
    q.add_argument("--angular-nodes", type=int, default=64)
    _common(q, tol=1e-2, radial=32)

    q = dsub.add_parser("delta-lambda", help="delta(lambda) for v = u^2")
    q.add_argument("file", type=Path, nargs="?", default=None, help="Series file for f; default f = 0")
    q.add_argument("--lambda", dest="lambdas", type=complex, action="append", default=None,
                   help="lambda value (repeatable); default -1, -0.1, -0.01")
    _common(q, grid=128)
    return parser


# ---------------------------------------------------------------------------


def _weight(args, file_weight=None):
    a = args.alpha if args.alpha is not None else (file_weight.alpha if file_weight else 0.5)
    b = args.beta if args.beta is not None else (file_weight.beta if file_weight else 0.5)
    return Weight(a, b)


def _load(path):
    f, w = read_series(path)
    return f, w


def _emit(args, name, text):
    if args.out is None:
        sys.stdout.write(text)
    else:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / name).write_text(text)


def _json(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, complex):
        return [x.real, x.imag]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    raise TypeError(type(x))


def cmd_norm(args):
    f, fw = _load(args.file)
    w = _weight(args, fw)
    print(f"{weighted_norm(f, w):.15g}")
    return EXIT_OK


def cmd_invert(args):
    f, fw = _load(args.file)
    w = _weight(args, fw)
    g, cert, trace = inversion.invert(f, args.delta, w, tol=args.tol, max_terms=args.max_terms,
                                      check_grid=args.grid)
    rec = inversion.certificate_record(cert, trace, input=str(args.file.name))
    if args.out is None:
        sys.stdout.write(_json({"inverse": json.loads(dumps_series(g, w)), "certificate": rec}))
    else:
        _emit(args, "inverse.json", dumps_series(g, w))
        _emit(args, "certificate.json", _json(rec))
    return EXIT_OK


def cmd_bezout(args):
    f1, fw = _load(args.file1)
    f2, _ = _load(args.file2)
    w = _weight(args, fw)
    delta = args.delta
    if delta is None:
        delta = corona.delta_pair(f1, f2, 64)
        if delta <= 0:
            raise PreconditionError("f1 and f2 have a common zero on the closed bidisc")
    grid = corona.CoronaGrid(radial_nodes=args.radial_nodes, angular_n=args.grid)
    sol, inter = corona.bezout_solve(f1, f2, delta, w, grid=grid, tol=args.tol, keep_intermediates=False)
    cert = inversion.certificate_record(sol.certificate, residual_norm=sol.residual_norm,
                                        anti_analytic_leak=sol.anti_analytic_leak, delta_input=delta)
    summary = {k: v for k, v in inter.summary.items() if not k.startswith("seconds")}
    if args.out is None:
        sys.stdout.write(_json({"h1": json.loads(dumps_series(sol.h1, w)),
                                "h2": json.loads(dumps_series(sol.h2, w)),
                                "certificate": cert, "intermediates": summary}))
    else:
        _emit(args, "h1.json", dumps_series(sol.h1, w))
        _emit(args, "h2.json", dumps_series(sol.h2, w))
        _emit(args, "certificate.json", _json(cert))
        _emit(args, "intermediates.json", _json(summary))
    return EXIT_OK


def _random_disc_points(rng, k):
    return [complex(r * np.exp(2j * np.pi * t)) for r, t in zip(np.sqrt(rng.random(k)), rng.random(k))]


def cmd_outer(args):
    f, _ = _load(args.file)
    rng = np.random.default_rng(args.seed)
    points = args.w_point or _random_disc_points(rng, 5)
    radii = diagnostics.default_profile_radii(args.levels)
    rows = []
    for wp in points:
        prof = diagnostics.outer_profile(f, wp, radii)
        rows.extend((wp, r, v) for r, v in zip(prof.radii, prof.values))
        rows.append((wp, "limit", prof.extrapolated_limit))
    _emit(args, "outer_profile.csv", diagnostics._csv(["w", "r", "value"], rows))
    return EXIT_OK


def random_nonvanishing(rng, terms=6, degree=3):
    """Polynomial c0 + p(z, w) with |c0| > ||p||_1, scaled to unit l1 norm."""
    idx = rng.integers(0, degree + 1, size=(terms, 2))
    coef = rng.uniform(-1, 1, terms) + 1j * rng.uniform(-1, 1, terms)
    p = Series2D.from_arrays(idx, coef) - Series2D.constant(coef[(idx == 0).all(axis=1)].sum())
    lead = (1.0 + rng.random()) * weighted_norm(p, Weight(0.0, 0.0)) + 0.1
    f = p + lead * np.exp(2j * np.pi * rng.random())
    return diagnostics.normalise_sup(f)


def cmd_growth(args):
    rng = np.random.default_rng(args.seed)
    cases = []
    if args.file is not None:
        f, _ = _load(args.file)
        cases.append((str(args.file.name), f))
    cases.extend((f"random-{k}", random_nonvanishing(rng)) for k in range(args.random))
    if not cases:
        raise SystemExit("growth: give a FILE or --random N")
    rows, failed = [], 0
    for name, f in cases:
        M = diagnostics.min_modulus_bound(f, args.grid)
        chk = diagnostics.growth_check(f, M, grid_n=args.grid)
        failed += chk.violations
        rows.append((name, M, chk.points, chk.violations, chk.worst_margin))
    _emit(args, "growth.csv", diagnostics._csv(["function", "M", "points", "violations", "worst_margin"], rows))
    return EXIT_OK if failed == 0 else EXIT_TOLERANCE


def cmd_u(args):
    grid = diagnostics.DiscGrid(angular_n=args.grid)
    rows = diagnostics.comparability_table(grid)
    lo, hi = diagnostics.u_comparability(grid, check=False)
    image = diagnostics.DiscGrid(radii=(0.5, 0.9, 0.99), angular_n=args.grid)
    margin = diagnostics.u_image_margin(image)
    report = {
        "c_low": lo,
        "c_high": hi,
        "c_low_required": diagnostics.COMPARABILITY_LOW,
        "image_min_re_inverse": margin,
        "image_ok": margin >= 0.5 - 1e-12,
        "v_power_identity_residual": diagnostics.v_power_identity(1),
    }
    _emit(args, "u_comparability.csv", diagnostics.comparability_csv(rows))
    _emit(args, "u_report.json", _json(report))
    ok = report["image_ok"] and lo >= diagnostics.COMPARABILITY_LOW and hi <= 1 + 1e-12
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_membership(args):
    w = _weight(args)
    if args.file is None:
        target, name = diagnostics.u_squared_d4, "u^2"
    else:
        target, _ = _load(args.file)
        name = str(args.file.name)
    res = diagnostics.membership_integral(target, w, args.eps, args.radial_nodes, args.angular_nodes,
                                          rtol=args.tol)
    report = {"function": name, "alpha": w.alpha, "beta": w.beta, "eps": args.eps,
              "value": res.value, "refined_value": res.refined_value,
              "relative_change": res.relative_change, "verdict": res.verdict,
              "levels": [list(x) for x in res.levels]}
    _emit(args, "membership.json", _json(report))
    return EXIT_OK if res.converged else EXIT_TOLERANCE


def cmd_delta_lambda(args):
    f = 0.0
    if args.file is not None:
        f, _ = _load(args.file)
    lambdas = args.lambdas or [-1.0 + 0j, -0.1 + 0j, -0.01 + 0j]
    grid = diagnostics.DiscGrid(angular_n=args.grid)
    res = [diagnostics.delta_lambda(f, diagnostics.u_squared, lam, grid) for lam in lambdas]
    _emit(args, "delta_lambda.csv", diagnostics.delta_lambda_csv(res))
    return EXIT_OK if all(r.lower_bound_ok for r in res) else EXIT_TOLERANCE


DIAGNOSE = {
    "outer": cmd_outer,
    "growth": cmd_growth,
    "u": cmd_u,
    "membership": cmd_membership,
    "delta-lambda": cmd_delta_lambda,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        RunConfig(weight=_weight(args), tol=args.tol or 1e-8, grid_n=args.grid or 256,
                  radial_nodes=args.radial_nodes or 64, seed=args.seed, output_dir=args.out)
    except ValueError as exc:
        parser.error(str(exc))
    try:
        if args.command == "diagnose":
            return DIAGNOSE[args.target](args)
        return {"norm": cmd_norm, "invert": cmd_invert, "bezout": cmd_bezout}[args.command](args)
    except SeriesFormatError as exc:
        print(f"beurling: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"beurling: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PreconditionError as exc:
        print(f"beurling: precondition: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ConvergenceError as exc:
        print(f"beurling: tolerance: {exc}", file=sys.stderr)
        return EXIT_TOLERANCE
    except ValueError as exc:
        print(f"beurling: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


if __name__ == "__main__":
    sys.exit(main())
