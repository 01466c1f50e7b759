"""``trisdp`` command line: gen, solve, certify, bench.

Exit codes: 0 success, 1 accuracy or certificate not reached, 2 usage or
input error (bad flags, unreadable or malformed files), 3 solver failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import SUITES, build_suite, rows_to_csv, run_suite, trend_slopes
from .dense_linalg import LinAlgError
from .pipeline import solve_sdp
from .problems_io import (
    SdpaParseError,
    gen_maxcut,
    gen_normmin,
    gen_random_sdp,
    normmin_problem,
    read_sdpa,
    read_sidecar,
    write_sdpa,
    write_sidecar,
)
from .sdp_model import DimensionError
from .sqp_solver import Diverged, certify_optimality

SCHEMA_VERSION = 1
EXIT_OK, EXIT_ACCURACY, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _finite(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _dump(obj, out):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# gen --------------------------------------------------------------------

_GEN_FIELDS = {
    "rand": ({"n", "m"}, set()),
    "maxcut": ({"n"}, {"density"}),
    "normmin": ({"p", "q", "m"}, set()),
}


def cmd_gen(args):
    required, optional = _GEN_FIELDS[args.family]
    given = {k for k in ("n", "m", "p", "q", "density") if getattr(args, k) is not None}
    missing = required - given
    extra = given - required - optional
    if missing:
        raise UsageError(f"--family {args.family} needs " + ", ".join(f"--{k}" for k in sorted(missing)))
    if extra:
        raise UsageError(f"--family {args.family} does not take " + ", ".join(f"--{k}" for k in sorted(extra)))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    s = args.seed
    try:
        if args.family == "rand":
            p = gen_random_sdp(args.n, args.m, s)[0]
            dims = {"n": args.n, "m": args.m}
            stem = f"rand_n{args.n}_m{args.m}_s{s}"
        elif args.family == "maxcut":
            density = 0.5 if args.density is None else args.density
            p = gen_maxcut(args.n, density, s)
            dims = {"n": args.n, "density": density}
            stem = f"maxcut_n{args.n}_s{s}"
        else:
            p = gen_normmin(args.p, args.q, args.m, s).problem
            dims = {"p": args.p, "q": args.q, "m": args.m}
            stem = f"normmin_p{args.p}_q{args.q}_m{args.m}_s{s}"
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    path = out / f"{stem}.dat-s"
    write_sdpa(p, path)
    write_sidecar(out / f"{stem}.json", args.family, dims, s)
    print(path)
    return EXIT_OK


# solve ------------------------------------------------------------------

def _load_problem(path):
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    try:
        return read_sdpa(path)
    except (SdpaParseError, ValueError) as exc:
        raise UsageError(f"{path}: {exc}") from exc


def _sidecar_for(path):
    side = Path(path).with_suffix(".json")
    if side.is_file():
        try:
            return read_sidecar(side)
        except (ValueError, OSError):
            return None
    return None


def _normmin_extras(meta, path, sol):
    """Recover ``(t, z)`` for norm-minimization instances with a sidecar."""
    if meta is None or meta.get("family") != "normmin":
        return None
    d = meta["dims"]
    nm = gen_normmin(d["p"], d["q"], d["m"], meta["seed"])
    nm = normmin_problem(nm.B)
    t, z = nm.variables_from_multipliers(sol.mu)
    return {"value": nm.value_from_objective(sol.objective), "t": t,
            "z_real": z.real.tolist(), "z_imag": z.imag.tolist(), "norm_at_z": nm.norm(z)}


def cmd_solve(args):
    p = _load_problem(args.input)
    if args.rank == "auto":
        r = None
    else:
        try:
            r = int(args.rank)
        except ValueError:
            raise UsageError(f"--rank must be 'auto' or an integer, got {args.rank!r}") from None
        if not 1 <= r <= p.n:
            raise UsageError(f"--rank must lie in [1, {p.n}]")
    if args.eps < 0 or args.max_iter < 1:
        raise UsageError("--eps must be >= 0 and --max-iter >= 1")
    try:
        sol = solve_sdp(p, args.model, r=r, eps=args.eps, max_iter=args.max_iter,
                        probe=args.probe_strictness)
    except (LinAlgError, Diverged, DimensionError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    meta = _sidecar_for(args.input)
    strict = sol.strictness
    report = {
        "schema_version": SCHEMA_VERSION,
        "problem": str(args.input),
        "problem_id": Path(args.input).stem,
        "family": meta["family"] if meta else "unknown",
        "n": p.n,
        "m": p.m,
        "r": sol.r,
        "model": sol.kind.value,
        "eps": args.eps,
        "warm_ms": sol.warm_ms,
        "sqp_ms": sol.sqp_ms,
        "total_ms": sol.total_ms,
        "iters": sol.iterations,
        "best_iteration": sol.report.best_iteration,
        "cold_start": not sol.warm.converged,
        "warm_criterion": sol.warm.criterion,
        "E": sol.E,
        "E_history": [float(e) for e in sol.report.E_history],
        "infeas": sol.infeasibility,
        "gap": sol.duality_gap,
        "objective": sol.objective,
        "certified": sol.certificate.certified,
        "certificate": {
            "margin": sol.certificate.margin,
            "stationarity": sol.certificate.stationarity,
            "primal_residual": sol.certificate.primal_residual,
        },
        "strictness": None if strict is None else {
            "lambda_min": _finite(strict.lambda_min_reduced),
            "nullity": strict.nullity,
            "dimension": strict.dimension,
            "strict": strict.strict,
        },
        "solution": {"F": sol.F.tolist(), "mu": sol.mu.tolist()},
    }
    extras = _normmin_extras(meta, args.input, sol)
    if extras is not None:
        report["normmin"] = extras
    _dump(report, args.out)
    ok = sol.E <= args.eps and sol.certificate.certified
    return EXIT_OK if ok else EXIT_ACCURACY


# certify ----------------------------------------------------------------

def cmd_certify(args):
    p = _load_problem(args.problem)
    path = Path(args.solution)
    if not path.is_file():
        raise UsageError(f"no such file: {path}")
    try:
        data = json.loads(path.read_text())
        sol = data.get("solution", data)
        F = np.array(sol["F"], dtype=float)
        mu = np.array(sol["mu"], dtype=float)
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise UsageError(f"{path}: not a solution file ({exc})") from exc
    if F.ndim != 2 or F.shape[0] != p.n or mu.shape != (p.m,):
        raise UsageError(f"solution shapes F{F.shape}, mu{mu.shape} do not match problem n={p.n}, m={p.m}")
    cert = certify_optimality(p, F, mu, tol=args.tol)
    _dump({
        "schema_version": SCHEMA_VERSION,
        "problem": str(args.problem),
        "solution": str(path),
        "tol": args.tol,
        "certified": cert.certified,
        "margin": cert.margin,
        "stationarity": cert.stationarity,
        "primal_residual": cert.primal_residual,
    }, args.out)
    return EXIT_OK if cert.certified else EXIT_ACCURACY


# bench ------------------------------------------------------------------

def cmd_bench(args):
    try:
        suite = build_suite(args.suite, args.scale, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.eps is not None:
        suite = type(suite)(suite.name, suite.instances, args.eps, suite.x_param)
    if args.jobs < 1 or args.repeats < 1:
        raise UsageError("--jobs and --repeats must be positive")
    rows = run_suite(suite, repeats=args.repeats, jobs=args.jobs, probe=not args.no_probe)
    text = rows_to_csv(rows)
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    if suite.x_param is not None:
        slopes = trend_slopes(rows, suite.x_param)
        print("total-time slope per unit " + suite.x_param + ": "
              + ", ".join(f"{k}={v:.4g} ms" for k, v in sorted(slopes.items())), file=sys.stderr)
    return EXIT_OK


# parser -----------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="trisdp", description="Triangular low-rank SDP toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a seeded instance as SDPA sparse + sidecar JSON")
    g.add_argument("--family", required=True, choices=("rand", "maxcut", "normmin"))
    g.add_argument("--n", type=int)
    g.add_argument("--m", type=int)
    g.add_argument("--p", type=int)
    g.add_argument("--q", type=int)
    g.add_argument("--density", type=float)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--out", default=".")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an SDPA file and print a JSON report")
    s.add_argument("input")
    s.add_argument("--model", choices=("tnsdp", "nsdp"), default="tnsdp")
    s.add_argument("--rank", default="auto")
    s.add_argument("--eps", type=float, default=1e-8)
    s.add_argument("--max-iter", type=int, default=100)
    s.add_argument("--probe-strictness", action="store_true")
    s.add_argument("--out", help="write the report here instead of stdout")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("certify", help="check the dual certificate of a stored solution")
    c.add_argument("problem")
    c.add_argument("solution")
    c.add_argument("--tol", type=float, default=1e-8)
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    b = sub.add_parser("bench", help="run a benchmark suite and emit CSV")
    b.add_argument("--suite", required=True, choices=SUITES)
    b.add_argument("--scale", choices=("desk", "paper"), default="desk")
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--out")
    b.add_argument("--eps", type=float, help="override the suite's stopping tolerance")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--repeats", type=int, default=1, help="timing repeats (minimum is kept)")
    b.add_argument("--no-probe", action="store_true", help="skip the strictness probe")
    b.set_defaults(func=cmd_bench)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"trisdp {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
