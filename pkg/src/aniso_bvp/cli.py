"""Command line front end: ``aniso-bvp <command> [options]``.

Exit codes: 0 success, 1 solver non-convergence, 2 input error, 3 the
worked-example reproduction missed one of its expected values.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .constants import SEED, Budget, constants_report
from .criteria import READINGS, criteria_report, estimate_rprime_sprime, rprime_lower_bound, sprime_upper_bound
from .nonlinearity import Region, sup_F_on
from .problem import Problem, ProblemError, load_problem
from .sequence_space import ExponentProfile
from .solvers import NoBarrierError, SolverConfig, log_grid, minimize_direct, mountain_pass, solve_deflated, sweep_lambda

EXIT_OK, EXIT_SOLVER, EXIT_INPUT, EXIT_REPRO = 0, 1, 2, 3
EXAMPLE = "bundled:worked-example"
log = logging.getLogger("aniso_bvp")


def jsonable(obj):
    """Plain JSON types; non-finite floats become the strings ``inf``, ``-inf``, ``nan``."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def _floats(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def parse_lambda_grid(text: str) -> np.ndarray:
    """``a:b:step`` as an inclusive arithmetic grid."""
    try:
        a, b, step = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--lambda-grid expects a:b:step, got {text!r}") from exc
    if not (a > 0 and b >= a and step > 0):
        raise argparse.ArgumentTypeError("--lambda-grid needs 0 < a <= b and step > 0")
    n = int(math.floor((b - a) / step + 1e-9)) + 1
    return a + step * np.arange(n)


def parse_log_grid(text: str) -> np.ndarray:
    """``a:b:n`` as ``n`` points spaced evenly in ``log2``."""
    try:
        a, b, n = text.split(":")
        return log_grid(float(a), float(b), int(n))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"--log-grid expects a:b:n with 0 < a <= b, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--seed", type=int, default=SEED, help="RNG seed (ANISO_BVP_SEED overrides)")
    common.add_argument("--tol", type=float, default=1e-8, help="residual sup-norm tolerance")
    common.add_argument("--exponent-reading", choices=READINGS, default="literal")
    common.add_argument("--p-last", type=float, help="override the last exponent p(T)")
    common.add_argument("--lambda", dest="lam", type=float, help="override the problem's lambda")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="aniso-bvp", description="Anisotropic discrete boundary value problems.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", parents=[common], help="thresholds and sufficient conditions")
    c.add_argument("problem")
    c.add_argument("--r-prime", type=float)
    c.add_argument("--s-prime", type=float)
    c.add_argument("--c", type=float, help="level for the radius bounds")
    c.add_argument("--M", type=float, default=0.0, help="sphere energy level for the mountain pass threshold")

    k = sub.add_parser("constants", parents=[common], help="best embedding constants and inequality checks")
    k.add_argument("--T", type=int, required=True)
    k.add_argument("--m", type=float, required=True)
    k.add_argument("--p", type=_floats, help="exponent profile for the anisotropic bound")
    k.add_argument("--samples", type=int, default=10_000)

    s = sub.add_parser("solve", parents=[common], help="direct energy minimization")
    s.add_argument("problem")
    s.add_argument("--start", type=_floats, help="interior start values u(1..T)")

    d = sub.add_parser("deflate", parents=[common], help="deflated Newton multi-start")
    d.add_argument("problem")

    m = sub.add_parser("mountain-pass", parents=[common], help="discretized-path saddle search")
    m.add_argument("problem")
    m.add_argument("--u1", type=_floats, required=True, help="interior values of the far endpoint")
    m.add_argument("--u0", type=_floats, help="interior values of the near endpoint (default 0)")
    m.add_argument("--n-path", type=int, default=41)

    w = sub.add_parser("sweep", parents=[common], help="deflated solves across a lambda grid")
    w.add_argument("problem")
    g = w.add_mutually_exclusive_group()
    g.add_argument("--lambda-grid", type=parse_lambda_grid, help="a:b:step")
    g.add_argument("--log-grid", type=parse_log_grid, help="a:b:n, log2-spaced")
    w.add_argument("--target", type=int, default=3)
    w.add_argument("--csv", help="CSV table path (default: next to --out, or sweep.csv)")

    r = sub.add_parser("reproduce-example", parents=[common], help="rerun the bundled worked example")
    r.add_argument("--no-sweep", action="store_true", help="skip the lambda sweep")
    r.add_argument("--log-grid", type=parse_log_grid, default=None, help="a:b:n (default 0.25:64:17)")
    return ap


def _config(args) -> SolverConfig:
    kw = {"tol": args.tol, "seed": args.seed}
    if getattr(args, "n_path", None):
        kw["n_path"] = args.n_path
    return SolverConfig(**kw)


def _load(args) -> Problem:
    return load_problem(args.problem, args.lam, args.p_last)


def cmd_check(args):
    prob = _load(args)
    rp = args.r_prime if args.r_prime is not None else prob.get("r_prime")
    sp = args.s_prime if args.s_prime is not None else prob.get("s_prime")
    radii = None
    if rp is None and "r" in prob.doc and "s" in prob.doc:
        radii = estimate_rprime_sprime(prob.doc["r"], prob.doc["s"], prob.spec.T, prob.spec.p)
        rp, sp = radii.r_prime, radii.s_prime
    rep = criteria_report(prob.spec, rp, sp, c=args.c, M=args.M, reading=args.exponent_reading)
    if radii is not None:
        rep["radii"] = radii.to_dict()
    return prob, rep, EXIT_OK


def cmd_constants(args):
    p = ExponentProfile(args.p) if args.p else None
    rep = constants_report(args.T, args.m, p, n_samples=args.samples, budget=Budget(seed=args.seed), seed=args.seed)
    return None, rep.to_dict(), EXIT_OK if rep.converged else EXIT_SOLVER


def cmd_solve(args):
    prob = _load(args)
    pt = minimize_direct(prob.spec, _config(args), args.start)
    return prob, pt.to_dict(), EXIT_OK if pt.converged else EXIT_SOLVER


def cmd_deflate(args):
    prob = _load(args)
    sol = solve_deflated(prob.spec, _config(args))
    return prob, sol.to_dict(), EXIT_OK if len(sol) else EXIT_SOLVER


def cmd_mountain_pass(args):
    prob = _load(args)
    try:
        pt = mountain_pass(prob.spec, _config(args), args.u1, args.u0)
    except NoBarrierError as exc:
        return prob, {"status": str(exc)}, EXIT_SOLVER
    return prob, pt.to_dict(), EXIT_OK if pt.converged else EXIT_SOLVER


def write_sweep_csv(path: str, table: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(["lambda", "n_solutions", "energies", "classifications"])
        for row in table:
            wr.writerow([repr(row["lambda"]), row["n_solutions"],
                         ";".join(repr(e) for e in row["energies"]), ";".join(row["classifications"])])


def cmd_sweep(args):
    prob = _load(args)
    grid = args.lambda_grid if args.lambda_grid is not None else args.log_grid
    if grid is None:
        grid = log_grid(0.25, 64.0, 17)
    res = sweep_lambda(prob.spec, grid, _config(args), args.target)
    path = args.csv or (str(Path(args.out).with_suffix(".csv")) if args.out else "sweep.csv")
    write_sweep_csv(path, res.table())
    out = res.to_dict()
    out["csv"] = path
    return prob, out, EXIT_OK


def example_bounds(T: int = 2, p: ExponentProfile | None = None, c: float = 1.0) -> dict:
    p = p if p is not None else ExponentProfile([4, 5, 4])
    return {"rprime_bound": rprime_lower_bound(c, T, p), "sprime_bound": sprime_upper_bound(c, T, p)}


def cmd_reproduce(args):
    prob = load_problem(EXAMPLE, args.lam, args.p_last)
    spec = prob.spec
    checks = []

    def expect(name, got, want, tol):
        ok = (got == want) if math.isinf(want) else abs(got - want) <= tol
        checks.append({"check": name, "got": got, "expected": want, "tol": tol, "passed": bool(ok)})

    b = example_bounds(spec.T, spec.p)
    expect("rprime_bound", b["rprime_bound"], 0.5296, 5e-5)
    expect("sprime_bound", b["sprime_bound"], 2.2430, 5e-5)
    rp, sp = prob.get("r_prime"), prob.get("s_prime")
    expect("sup |t|<=3 F(1,t)", sup_F_on(spec.nl, 1, Region.ball(sp)), 0.0, 1e-10)
    expect("sup 0.2<=|t|<=3 F(2,t)", sup_F_on(spec.nl, 2, Region.annulus(rp, sp)), 0.0, 1e-10)
    expect("sup |t|<=3 F(2,t)", sup_F_on(spec.nl, 2, Region.ball(sp)), 1e-4, 1e-10)
    expect("sup_R F(1,t)", sup_F_on(spec.nl, 1, Region.reals()), math.inf, 0.0)
    rep = criteria_report(spec, rp, sp, c=1.0, reading=args.exponent_reading)
    conds = rep["three_point"]["conditions"]
    for name in ("global_sup_gap", "annulus_bound"):
        checks.append({"check": name, "passed": bool(conds[name]["holds"])})
    checks.append({"check": "radius_condition", "passed": bool(rep["radius_condition"]["holds"])})
    out = {"bounds": b, "criteria": rep}
    if not args.no_sweep:
        grid = args.log_grid if args.log_grid is not None else log_grid(0.25, 64.0, 17)
        res = sweep_lambda(spec, grid, _config(args), target=3, stop_at_target=True)
        out["sweep"] = res.to_dict()
        checks.append({"check": "three critical points for some lambda", "first_hit": res.first_hit,
                       "passed": res.first_hit is not None})
    out["checks"] = checks
    out["all_passed"] = all(c["passed"] for c in checks)
    return prob, out, EXIT_OK if out["all_passed"] else EXIT_REPRO


COMMANDS = {
    "check": cmd_check,
    "constants": cmd_constants,
    "solve": cmd_solve,
    "deflate": cmd_deflate,
    "mountain-pass": cmd_mountain_pass,
    "sweep": cmd_sweep,
    "reproduce-example": cmd_reproduce,
}


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(jsonable(report), indent=2, ensure_ascii=False)
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    env_seed = os.environ.get("ANISO_BVP_SEED")
    if env_seed is not None:
        try:
            args.seed = int(env_seed, 0)
        except ValueError:
            print(f"error: ANISO_BVP_SEED must be an integer, got {env_seed!r}", file=sys.stderr)
            return EXIT_INPUT
    t0 = time.perf_counter()
    try:
        prob, results, code = COMMANDS[args.command](args)
    except (ProblemError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    config = {k: v for k, v in vars(args).items() if k not in ("out", "verbose")}
    report = {
        "command": args.command,
        "version": __version__,
        "source": prob.source if prob else None,
        "input_digest": prob.digest if prob else None,
        "seed": args.seed,
        "config": config,
        "results": results,
        "wall_time_s": time.perf_counter() - t0,
        "exit_code": code,
    }
    _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
