"""Convergence-order studies: time integration, references, slope fitting and CSV output."""

from __future__ import annotations

import csv
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .errors import ConfigError, ReferenceCheckError, SplittingError
from .field import NormKind, State, norm
from .splitting import SchemeSpec, SplitProblem, StepDiagnostics, step, triple_jump_coefficients

__all__ = [
    "ExactSolution",
    "SelfReference",
    "StudyConfig",
    "StudyRow",
    "StudyResult",
    "integrate",
    "reference_scheme",
    "reference_solution",
    "fit_window",
    "fit_order",
    "run_study",
    "write_csv",
    "read_csv",
    "write_plot_script",
    "dyadic_taus",
    "resolution_check",
    "default_threads",
]

log = logging.getLogger(__name__)

THREADS_ENV = "ITERSPLIT_THREADS"


@dataclass(frozen=True)
class ExactSolution:
    """Compare against the problem's analytic solution."""


@dataclass(frozen=True)
class SelfReference:
    """Compare against an iterated triple-jump run at ``min(tau_list) / factor``.

    ``tau`` fixes the reference step directly instead. That is useful when
    the fourth-order reference reaches its accuracy floor well before
    ``tau_min / factor`` and the finer run would only cost time.
    """

    factor: int = 20
    tau: Optional[float] = None

    def __post_init__(self):
        if self.factor < 10:
            raise ConfigError(f"self-reference factor must be >= 10, got {self.factor}")
        if self.tau is not None and not self.tau > 0:
            raise ConfigError(f"reference step must be positive, got {self.tau}")

    def step_for(self, tau_min: Optional[float]) -> float:
        if self.tau is not None:
            return float(self.tau)
        if tau_min is None:
            raise ConfigError("a self-reference needs the smallest study step")
        return tau_min / self.factor


Reference = Union[ExactSolution, SelfReference]


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def dyadic_taus(T: float, m_min: int, m_max: int) -> list[float]:
    """``[T / 2**m for m in m_min..m_max]`` (decreasing)."""
    return [T / 2.0**m for m in range(m_min, m_max + 1)]


def _steps_for(T, tau):
    n = int(round(T / tau))
    if n < 1 or abs(n * tau - T) > max(n, 1) * np.spacing(T) * 2:
        raise ConfigError(f"tau={tau!r} does not divide T={T!r}")
    return n


@dataclass
class StudyConfig:
    problem: SplitProblem
    scheme: SchemeSpec
    T: float
    tau_list: Sequence[float]
    norm: Optional[NormKind] = None
    reference: Reference = field(default_factory=SelfReference)
    u0: Optional[State] = None
    out: Optional[Union[str, Path]] = None
    threads: Optional[int] = None
    problem_id: Optional[str] = None
    #: fit window is ``[fit_floor_factor * ref_floor, fit_ceiling]``
    fit_floor_factor: float = 1e2
    fit_ceiling: float = 1e-2
    #: the two self-reference runs must agree to this (absolute) level
    max_ref_floor: float = 1e-6
    #: coefficient family for the self-reference; None picks real when backward steps are safe
    reference_coeffs: Optional[str] = None

    def __post_init__(self):
        self.tau_list = [float(t) for t in self.tau_list]
        self.norm = self.problem.norm_kind if self.norm is None else NormKind.parse(self.norm)
        if self.problem_id is None:
            self.problem_id = self.problem.name
        if self.u0 is None:
            self.u0 = self.problem.initial_state()
        self.validate()

    def validate(self):
        if not self.T > 0:
            raise ConfigError(f"final time must be positive, got {self.T}")
        if len(self.tau_list) < 4:
            raise ConfigError("need at least 4 step sizes for a slope fit")
        if any(t <= 0 for t in self.tau_list):
            raise ConfigError("step sizes must be positive")
        if any(b >= a for a, b in zip(self.tau_list, self.tau_list[1:])):
            raise ConfigError("tau_list must be strictly decreasing")
        for tau in self.tau_list:
            _steps_for(self.T, tau)


@dataclass
class StudyRow:
    tau: float
    error: float
    wall_time: float
    iterations: int


@dataclass
class StudyResult:
    rows: list
    fitted_order: float
    fit_window: list
    ref_floor: float
    scheme: str = ""
    problem: str = ""
    norm: str = ""

    @property
    def taus(self):
        return np.array([r.tau for r in self.rows])

    @property
    def errors(self):
        return np.array([r.error for r in self.rows])


def integrate(problem: SplitProblem, scheme: SchemeSpec, tau, T, u0: State, *, project_real=None):
    """Apply ``scheme`` ``T / tau`` times starting from ``u0``.

    On real-valued problems the imaginary part is discarded after every full
    step (``project_real=None`` follows ``problem.real_valued``). Failures of
    any step are re-raised with ``step_index`` set.
    """
    n = _steps_for(T, tau)
    project = problem.real_valued if project_real is None else project_real
    u = u0
    parts = []
    for k in range(n):
        try:
            u, d = step(problem, scheme, tau, u)
        except SplittingError as exc:
            raise exc.with_step(k)
        if project:
            u = u.real()
        parts.append(d)
    return u, StepDiagnostics.merge(parts)


def reference_scheme(coeffs="real", iterations=4) -> SchemeSpec:
    """Iterated triple jump: base ``IteratedStrang(iterations)`` with ``p = 2`` coefficients."""
    return SchemeSpec.composition(SchemeSpec.iterated_strang(iterations), triple_jump_coefficients(2, coeffs))


def reference_solution(
    problem: SplitProblem,
    T: float,
    u0: State,
    reference: Reference,
    tau_min: float = None,
    *,
    norm_kind=None,
    coeffs=None,
    max_floor=math.inf,
):
    """Reference solution at ``T`` and its estimated accuracy floor.

    ``ExactSolution`` uses :meth:`SplitProblem.exact_solution`; its floor is
    the inner-solver tolerance scaled by ``||u0||``. ``SelfReference(f)``
    integrates the iterated triple jump at ``tau_min / f`` (or its fixed
    ``tau``) and again at half
    that step, returns the finer run and uses the difference of the two runs
    as the floor. Raises :class:`ReferenceCheckError` when that difference
    exceeds ``max_floor``.
    """
    kind = problem.norm_kind if norm_kind is None else NormKind.parse(norm_kind)
    if isinstance(reference, ExactSolution):
        exact = problem.exact_solution(T)
        if exact is None:
            raise ConfigError(f"{problem.name} has no exact solution")
        floor = max(problem.default_inner_tol, np.finfo(float).eps) * norm(u0, kind)
        return exact, floor
    if coeffs is None:
        coeffs = "real" if problem.backward_stable else "complex"
    scheme = reference_scheme(coeffs)
    tau_ref = reference.step_for(tau_min)
    coarse, _ = integrate(problem, scheme, tau_ref, T, u0)
    fine, _ = integrate(problem, scheme, tau_ref / 2, T, u0)
    floor = norm(fine - coarse, kind)
    log.info("reference at tau=%.3e: self-check difference %.3e", tau_ref, floor)
    if floor > max_floor:
        raise ReferenceCheckError(f"reference runs at tau={tau_ref:.3e} and tau/2 differ by {floor:.3e} > {max_floor:.3e}")
    return fine, floor


def fit_window(errors, floor=0.0, ceiling=math.inf) -> list[int]:
    """Indices of rows whose error lies in ``[floor, ceiling]``."""
    return [i for i, e in enumerate(errors) if floor <= e <= ceiling and e > 0]


def fit_order(taus, errors, *, floor=0.0, ceiling=math.inf) -> float:
    """Least-squares slope of ``log(error)`` against ``log(tau)`` over the fit window."""
    idx = fit_window(errors, floor, ceiling)
    if len(idx) < 3:
        raise ValueError(f"only {len(idx)} rows inside the fit window [{floor:.3g}, {ceiling:.3g}]; need 3")
    x = np.log(np.asarray(taus, dtype=float)[idx])
    y = np.log(np.asarray(errors, dtype=float)[idx])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def _run_one(config: StudyConfig, tau, ref):
    t0 = time.perf_counter()
    u, diag = integrate(config.problem, config.scheme, tau, config.T, config.u0)
    wall = time.perf_counter() - t0
    return StudyRow(tau, norm(u - ref, config.norm), wall, diag.iterations_used)


def _preflight(config: StudyConfig):
    # one step at the largest tau surfaces unstable configurations before the costly reference
    try:
        step(config.problem, config.scheme, config.tau_list[0], config.u0)
    except SplittingError as exc:
        raise exc.with_step(0)


def run_study(config: StudyConfig, *, reference=None) -> StudyResult:
    """Run every step size of ``config`` and fit the convergence order.

    ``reference`` may pass a precomputed ``(state, floor)`` pair so that
    several schemes can share one reference. The rows keep the order of
    ``config.tau_list`` regardless of thread completion order.
    """
    _preflight(config)
    if reference is None:
        reference = reference_solution(
            config.problem,
            config.T,
            config.u0,
            config.reference,
            min(config.tau_list),
            norm_kind=config.norm,
            coeffs=config.reference_coeffs,
            max_floor=config.max_ref_floor,
        )
    ref, floor = reference
    threads = config.threads or default_threads()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda tau: _run_one(config, tau, ref), config.tau_list))
    else:
        rows = [_run_one(config, tau, ref) for tau in config.tau_list]

    errors = [r.error for r in rows]
    lo, hi = config.fit_floor_factor * floor, config.fit_ceiling
    window = fit_window(errors, lo, hi)
    try:
        order = fit_order([r.tau for r in rows], errors, floor=lo, ceiling=hi)
    except ValueError as exc:
        log.warning("%s", exc)
        order = float("nan")
    result = StudyResult(
        rows=rows,
        fitted_order=order,
        fit_window=window,
        ref_floor=floor,
        scheme=config.scheme.label,
        problem=config.problem_id,
        norm=config.norm.value,
    )
    if config.out is not None:
        write_csv(result, config.out)
    return result


def resolution_check(make_problem, n, scheme: SchemeSpec, T, tau, reference: Reference, *, norm_kind=None):
    """Relative change of the error at one ``tau`` when the grid is refined from ``n`` to ``2 n``.

    ``make_problem(n)`` builds the problem at a given resolution. Each
    resolution is compared against its own reference, so the number measures
    whether the time-discretization error depends on the spatial grid.
    Returns ``(relative_change, error_n, error_2n)``.
    """
    errs = []
    for size in (n, 2 * n):
        prob = make_problem(size)
        kind = prob.norm_kind if norm_kind is None else NormKind.parse(norm_kind)
        u0 = prob.initial_state()
        ref, _ = reference_solution(prob, T, u0, reference, tau, norm_kind=kind)
        u, _ = integrate(prob, scheme, tau, T, u0)
        errs.append(norm(u - ref, kind))
    return abs(errs[1] - errs[0]) / errs[0], errs[0], errs[1]


CSV_HEADER = ["tau", "error", "wall_time_s", "iterations", "scheme", "problem", "norm"]


def write_csv(result: StudyResult, path) -> None:
    """Write one row per step size plus ``# fitted_order=`` and ``# ref_floor=`` trailers.

    ``path`` may be a filesystem path or an open text stream.
    """
    own = not hasattr(path, "write")
    fh = open(path, "w", newline="") if own else path
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for r in result.rows:
            writer.writerow(
                [repr(float(r.tau)), repr(float(r.error)), f"{r.wall_time:.6f}", r.iterations, result.scheme, result.problem, result.norm]
            )
        fh.write(f"# fitted_order={float(result.fitted_order)!r}\n")
        fh.write(f"# ref_floor={float(result.ref_floor)!r}\n")
        fh.write(f"# fit_window={','.join(str(i) for i in result.fit_window)}\n")
    finally:
        if own:
            fh.close()


def read_csv(path) -> StudyResult:
    """Parse a file written by :func:`write_csv`."""
    rows, meta = [], {}
    scheme = problem = norm_name = ""
    with open(path, newline="") as fh:
        lines = fh.read().splitlines()
    data = [ln for ln in lines if not ln.startswith("#")]
    for ln in lines:
        if ln.startswith("#") and "=" in ln:
            key, _, value = ln[1:].strip().partition("=")
            meta[key] = value
    reader = csv.DictReader(data)
    for rec in reader:
        rows.append(StudyRow(float(rec["tau"]), float(rec["error"]), float(rec["wall_time_s"]), int(rec["iterations"])))
        scheme, problem, norm_name = rec["scheme"], rec["problem"], rec["norm"]
    window = [int(i) for i in meta.get("fit_window", "").split(",") if i]
    return StudyResult(
        rows=rows,
        fitted_order=float(meta.get("fitted_order", "nan")),
        fit_window=window,
        ref_floor=float(meta.get("ref_floor", "nan")),
        scheme=scheme,
        problem=problem,
        norm=norm_name,
    )


def write_plot_script(csv_paths: Sequence, out_path, *, expected_orders: Sequence[float] = (), title="order plot") -> None:
    """Emit a gnuplot script drawing every CSV on log-log axes with order guide lines."""
    lines = [
        "set logscale xy",
        "set datafile separator ','",
        "set key left top",
        "set xlabel 'tau'",
        "set ylabel 'error'",
        f"set title '{title}'",
    ]
    series = []
    for p in csv_paths:
        series.append(f"'{p}' using 1:2 skip 1 with linespoints title '{Path(p).stem}'")
    # anchor each guide line at the first row of the first file
    anchor = None
    if csv_paths:
        first = read_csv(csv_paths[0])
        if first.rows:
            anchor = (first.rows[0].tau, first.rows[0].error)
    for j, q in enumerate(expected_orders):
        c = anchor[1] / anchor[0] ** q if anchor else 1.0
        lines.append(f"c{j} = {c!r}")
        series.append(f"c{j} * x**{q} with lines dashtype 2 title 'slope {q}'")
    lines.append("plot " + ", \\\n     ".join(series))
    Path(out_path).write_text("\n".join(lines) + "\n")
