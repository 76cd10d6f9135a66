"""Command-line front end: ``itersplit {study,run,verify}``.

Exit codes: 0 success, 1 numerical failure (divergence, instability, flow
failure), 2 configuration error, 3 verification failure. Failures print one
JSON object on standard error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError, SplittingError
from .field import NormKind, norm
from .problems import Brusselator, KdV, KdVConfig, ToyODE
from .splitting import SchemeSpec, SplitProblem, triple_jump_coefficients
from .study import (
    ExactSolution,
    SelfReference,
    StudyConfig,
    default_threads,
    dyadic_taus,
    integrate,
    reference_solution,
    run_study,
    write_csv,
    write_plot_script,
)
from .verify import run_all

EXIT_OK, EXIT_NUMERICAL, EXIT_CONFIG, EXIT_VERIFY = 0, 1, 2, 3

PROBLEMS = ("brusselator", "kdv-soliton", "kdv-schwartz", "toy-ode")
SCHEMES = ("lie", "strang", "iter-strang", "triple-jump", "iter-triple-jump")
NOMINAL_ORDER = {"lie": 1, "strang": 2, "iter-strang": 2, "triple-jump": 3, "iter-triple-jump": 4}


@dataclass(frozen=True)
class ProblemDefaults:
    T: float
    n: int
    norm: str
    coeffs: str
    #: reference step as a fraction of T (None: tau_min / ref-factor, or the exact solution)
    ref_tau_exp: Optional[int]
    #: first dyadic exponent m (tau = T / 2**m) of the default sweep, per scheme
    sweep_start: dict


DEFAULTS = {
    "brusselator": ProblemDefaults(
        0.25, 128, "inf", "complex", 9,
        {"lie": 7, "strang": 7, "iter-strang": 7, "triple-jump": 4, "iter-triple-jump": 4},
    ),
    "kdv-soliton": ProblemDefaults(
        0.4, 1024, "l2", "real", None,
        {"lie": 7, "strang": 7, "iter-strang": 7, "triple-jump": 5, "iter-triple-jump": 7},
    ),
    "kdv-schwartz": ProblemDefaults(
        0.05, 2048, "l2", "real", 11,
        {"lie": 4, "strang": 4, "iter-strang": 4, "triple-jump": 3, "iter-triple-jump": 3},
    ),
    "toy-ode": ProblemDefaults(
        0.5, 8, "inf", "real", None,
        {"lie": 4, "strang": 4, "iter-strang": 4, "triple-jump": 3, "iter-triple-jump": 3},
    ),
}
DEFAULT_TAU_COUNT = 6
DEFAULT_ITERATIONS = 4
DEFAULT_INNER_TOL = 1e-12
DEFAULT_REF_FACTOR = 20


def _epilog():
    lines = ["per-problem defaults (used when the flag is omitted):"]
    for name, d in DEFAULTS.items():
        ref = "exact solution" if name in ("kdv-soliton", "toy-ode") else f"self-reference at T/2^{d.ref_tau_exp}"
        sweeps = ", ".join(f"{s}: T/2^{m}" for s, m in d.sweep_start.items())
        lines.append(f"  {name}: tmax={d.T} n={d.n} norm={d.norm} coeffs={d.coeffs} reference={ref}")
        lines.append(f"    tau-max by scheme: {sweeps}")
    lines.append(f"  all problems: tau-count={DEFAULT_TAU_COUNT} iterations={DEFAULT_ITERATIONS}"
                 f" inner-tol={DEFAULT_INNER_TOL} ref-factor={DEFAULT_REF_FACTOR}")
    lines.append("exit codes: 0 ok, 1 numerical failure, 2 configuration error, 3 verification failure")
    return "\n".join(lines)


def _add_model_flags(p: argparse.ArgumentParser, sweep: bool):
    p.add_argument("--problem", choices=PROBLEMS, required=True)
    p.add_argument("--scheme", choices=SCHEMES, required=True)
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS,
                   help="fixed-point iterations i of the iterated Strang base (default: %(default)s)")
    p.add_argument("--n", type=int, help="grid points per dimension (default: per problem)")
    p.add_argument("--tmax", type=float, help="final time T (default: per problem)")
    p.add_argument("--norm", choices=[k.value for k in NormKind], help="error norm (default: per problem)")
    p.add_argument("--coeffs", choices=("real", "complex"), help="triple-jump coefficients (default: per problem)")
    p.add_argument("--inner-tol", type=float, default=DEFAULT_INNER_TOL,
                   help="tolerance of numerically computed partial flows (default: %(default)s)")
    p.add_argument("--ref-factor", type=int, default=DEFAULT_REF_FACTOR,
                   help="self-reference step is tau_min / ref-factor (default: %(default)s)")
    p.add_argument("--ref-tau", type=float,
                   help="explicit self-reference step; overrides --ref-factor (default: per problem)")
    if sweep:
        p.add_argument("--tau-max", type=float, help="largest step of the dyadic sweep (default: per problem and scheme)")
        p.add_argument("--tau-min", type=float, help="smallest step; with --tau-max fixes the sweep length")
        p.add_argument("--tau-count", type=int, default=DEFAULT_TAU_COUNT,
                       help="number of dyadic steps when --tau-min is omitted (default: %(default)s)")
        p.add_argument("--out", help="CSV output path (default: standard output)")
        p.add_argument("--plot", help="also write a gnuplot script to this path")
        p.add_argument("--threads", type=int,
                       help="concurrent trajectories (default: $ITERSPLIT_THREADS or the CPU count)")
    else:
        p.add_argument("--tau", type=float, help="step size (default: largest step of the default sweep)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="itersplit",
        description="Operator-splitting integrators and convergence-order studies.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_epilog(),
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to standard error")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    fmt = dict(formatter_class=argparse.RawDescriptionHelpFormatter, epilog=_epilog())
    _add_model_flags(sub.add_parser("study", help="run a step-size sweep and fit the order", **fmt), sweep=True)
    _add_model_flags(sub.add_parser("run", help="integrate once and report the error", **fmt), sweep=False)
    v = sub.add_parser("verify", help="run the built-in property checks")
    v.add_argument("--check", action="append", help="run only the named check (repeatable)")
    return parser


def make_problem(name: str, n: int, inner_tol: float) -> SplitProblem:
    if name == "brusselator":
        return Brusselator(n=n)
    if name == "kdv-soliton":
        return KdV(KdVConfig("soliton", n=n, inner_tol=inner_tol))
    if name == "kdv-schwartz":
        return KdV(KdVConfig("schwartzian", n=n, inner_tol=inner_tol))
    if name == "toy-ode":
        return ToyODE(n=n)
    raise ConfigError(f"unknown problem {name!r}")


def make_scheme(name: str, iterations: int, coeffs: str, inner_tol: float) -> SchemeSpec:
    kw = dict(inner_tol=inner_tol)
    if name == "lie":
        return SchemeSpec.lie(**kw)
    if name == "strang":
        return SchemeSpec.strang(**kw)
    if name == "iter-strang":
        return SchemeSpec.iterated_strang(iterations, **kw)
    gammas = triple_jump_coefficients(2, coeffs)
    if name == "triple-jump":
        return SchemeSpec.composition(SchemeSpec.strang(**kw), gammas)
    if name == "iter-triple-jump":
        return SchemeSpec.composition(SchemeSpec.iterated_strang(iterations, **kw), gammas)
    raise ConfigError(f"unknown scheme {name!r}")


def _sweep(args, d: ProblemDefaults, T: float) -> list[float]:
    tau_max = args.tau_max if args.tau_max is not None else T / 2.0 ** d.sweep_start[args.scheme]
    if args.tau_min is not None:
        taus = [tau_max]
        while taus[-1] / 2 >= args.tau_min * (1 - 1e-12):
            taus.append(taus[-1] / 2)
        return taus
    if args.tau_count < 1:
        raise ConfigError("--tau-count must be positive")
    return [tau_max / 2.0**j for j in range(args.tau_count)]


def _reference(args, d: ProblemDefaults, problem: SplitProblem, T: float):
    if args.ref_tau is not None:
        return SelfReference(args.ref_factor, tau=args.ref_tau)
    if problem.exact_solution(0.0) is not None:
        return ExactSolution()
    if d.ref_tau_exp is not None:
        return SelfReference(args.ref_factor, tau=T / 2.0**d.ref_tau_exp)
    return SelfReference(args.ref_factor)


def _setup(args):
    d = DEFAULTS[args.problem]
    T = d.T if args.tmax is None else args.tmax
    n = d.n if args.n is None else args.n
    if args.iterations < 1:
        raise ConfigError("--iterations must be >= 1")
    if not args.inner_tol > 0:
        raise ConfigError("--inner-tol must be positive")
    SelfReference(args.ref_factor)  # validates the factor even when the exact solution is used
    coeffs = args.coeffs or d.coeffs
    norm_kind = NormKind.parse(args.norm or d.norm)
    try:
        problem = make_problem(args.problem, n, args.inner_tol)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    scheme = make_scheme(args.scheme, args.iterations, coeffs, args.inner_tol)
    return d, T, problem, scheme, norm_kind


def cmd_study(args) -> int:
    d, T, problem, scheme, norm_kind = _setup(args)
    config = StudyConfig(
        problem=problem,
        scheme=scheme,
        T=T,
        tau_list=_sweep(args, d, T),
        norm=norm_kind,
        reference=_reference(args, d, problem, T),
        threads=args.threads or default_threads(),
        problem_id=args.problem,
    )
    result = run_study(config)
    if args.out:
        write_csv(result, args.out)
        if args.plot:
            write_plot_script([args.out], args.plot, expected_orders=[NOMINAL_ORDER[args.scheme]],
                              title=f"{args.problem} {args.scheme}")
    else:
        write_csv(result, sys.stdout)
    print(json.dumps({"fitted_order": result.fitted_order, "ref_floor": result.ref_floor,
                      "fit_window": result.fit_window}), file=sys.stderr)
    return EXIT_OK


def cmd_run(args) -> int:
    d, T, problem, scheme, norm_kind = _setup(args)
    tau = args.tau if args.tau is not None else T / 2.0 ** d.sweep_start[args.scheme]
    u0 = problem.initial_state()
    t0 = time.perf_counter()
    u, diag = integrate(problem, scheme, tau, T, u0)
    wall = time.perf_counter() - t0
    ref, floor = reference_solution(problem, T, u0, _reference(args, d, problem, T), tau, norm_kind=norm_kind)
    print(json.dumps({
        "problem": args.problem,
        "scheme": scheme.label,
        "tau": tau,
        "T": T,
        "error": norm(u - ref, norm_kind),
        "ref_floor": floor,
        "norm": norm_kind.value,
        "iterations": diag.iterations_used,
        "wall_time_s": wall,
    }))
    return EXIT_OK


def cmd_verify(args) -> int:
    names = args.check
    if names:
        from .verify import CHECKS

        unknown = [c for c in names if c not in CHECKS]
        if unknown:
            raise ConfigError(f"unknown checks {unknown}; available: {sorted(CHECKS)}")
    results = run_all(names)
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(json.dumps({"error": "VERIFY", "failed": failed}), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def _fail(kind: str, message: str, **extra) -> None:
    print(json.dumps({"error": kind, "message": message, **extra}), file=sys.stderr)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on bad flags and 0 on --help
        if exc.code not in (0, None):
            _fail("CONFIG", "invalid command line")
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"study": cmd_study, "run": cmd_run, "verify": cmd_verify}[args.subcommand]
    try:
        return handler(args)
    except SplittingError as exc:
        _fail(exc.kind, str(exc), step=exc.step_index)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError) as exc:
        _fail("CONFIG", str(exc))
        return EXIT_CONFIG


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
