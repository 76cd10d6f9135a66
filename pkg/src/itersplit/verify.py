"""Built-in property checks run by ``itersplit verify``.

Each check returns a :class:`CheckResult`; :func:`run_all` collects them.
The checks are cheap (a few seconds in total) and only use the scalar toy
problem for anything that needs backward steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import mpmath
import numpy as np

from .field import NormKind, norm
from .phi import phi
from .problems import ToyODE
from .splitting import SchemeSpec, iterated_strang_step, step, symmetry_defect, triple_jump_coefficients

__all__ = [
    "CheckResult",
    "CHECKS",
    "run_all",
    "phi_sample",
    "phi_recursion_residuals",
    "contraction_ratios",
    "iterate_limit_errors",
    "loglog_slope",
]


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def phi_sample(n=10_000, r_max=50.0, r_min=1e-8, seed=0):
    """``n`` complex points with log-spaced moduli in ``[r_min, r_max]`` and random arguments."""
    rng = np.random.default_rng(seed)
    r = np.logspace(math.log10(r_min), math.log10(r_max), n)
    return r * np.exp(2j * np.pi * rng.random(n))


def loglog_slope(taus, values, noise=0.0):
    """Least-squares slope of ``log(values)`` over ``log(taus)``, ignoring values at or below ``noise``."""
    taus = np.asarray(taus, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > noise
    if keep.sum() < 3:
        raise ValueError("fewer than three values above the noise level")
    return float(np.polyfit(np.log(taus[keep]), np.log(values[keep]), 1)[0])


def phi_recursion_residuals(z):
    """Worst residual of ``phi_k = 1/k! + z phi_{k+1}`` for ``k = 0, 1, 2``.

    Returns ``{k: (scaled, relative)}`` where ``scaled`` divides by
    ``max(1, |phi_k|)`` and ``relative`` by ``|phi_k|``. For ``k = 0`` and
    ``Re z << 0`` the right-hand side cancels down to ``e^z``, so only the
    scaled residual is meaningful there (even correctly rounded values of
    ``exp`` and ``phi_1`` leave a relative residual of order ``eps e^{-Re z}``).
    """
    out = {}
    for k in (0, 1, 2):
        lhs = phi(k, z)
        r = np.abs(lhs - (1.0 / math.factorial(k) + z * phi(k + 1, z)))
        out[k] = (float(np.max(r / np.maximum(1.0, np.abs(lhs)))), float(np.max(r / np.abs(lhs))))
    return out


def check_phi_recursion(tol=1e-13) -> CheckResult:
    res = phi_recursion_residuals(phi_sample())
    scaled = max(v[0] for v in res.values())
    rel = max(res[k][1] for k in (1, 2))
    ok = scaled <= tol and rel <= tol
    return CheckResult(
        "phi recursion",
        ok,
        f"max residual/max(1,|phi_k|) {scaled:.2e}, max relative (k>=1) {rel:.2e} (tol {tol:.0e})",
    )


def _phi1_oracle(z):
    with mpmath.workdps(50):
        zz = mpmath.mpc(z.real, z.imag)
        s = mpmath.nsum(lambda j: zz**j / mpmath.factorial(j + 1), [0, mpmath.inf])
        return complex(s)


def check_phi1_small(tol=1e-13, n=200) -> CheckResult:
    z = phi_sample(n, r_max=1e-3, r_min=1e-12, seed=1)
    got = phi(1, z)
    ref = np.array([_phi1_oracle(v) for v in z])
    err = float(np.max(np.abs(got - ref) / np.abs(ref)))
    return CheckResult("phi_1 near zero", err <= tol, f"max relative error {err:.2e} vs series oracle (tol {tol:.0e})")


def check_gammas(tol=1e-14) -> CheckResult:
    msgs, ok = [], True
    for mode in ("real", "complex"):
        g = np.array(triple_jump_coefficients(2, mode))
        s1 = abs(g.sum() - 1)
        s3 = abs((g**3).sum())
        ok &= s1 <= tol and s3 <= tol
        msgs.append(f"{mode}: |sum-1|={s1:.1e} |sum g^3|={s3:.1e}")
    gc = triple_jump_coefficients(2, "complex")
    positive = all(c.real > 0 for c in gc)
    ok &= positive
    msgs.append(f"complex real parts positive: {positive}")
    return CheckResult("triple-jump coefficients", bool(ok), "; ".join(msgs))


def contraction_ratios(problem, tau, u0, iterations=8, noise=None):
    """Successive increment ratios of the iterated Strang fixed point, above the noise level."""
    _, diag = iterated_strang_step(problem, tau, u0, iterations)
    inc = np.array(diag.fixed_point_increments)
    if noise is None:
        noise = 1e3 * max(problem.default_inner_tol, np.finfo(float).eps) * max(1.0, norm(u0, problem.norm_kind))
    inc = inc[inc > noise]
    return inc[1:] / inc[:-1]


def check_contraction() -> CheckResult:
    toy = ToyODE(u0=1.0)
    u0 = toy.initial_state()
    qs = []
    for tau in (0.2, 0.1, 0.05):
        r = contraction_ratios(toy, tau, u0)
        qs.append(float(r.max()) if r.size else 0.0)
    ok = all(q < 1 for q in qs) and qs[0] > qs[1] > qs[2]
    return CheckResult("fixed-point contraction", ok, "q(tau=0.2,0.1,0.05) = " + ", ".join(f"{q:.3f}" for q in qs))


DEFECT_TAUS = tuple(2.0**-j for j in range(4, 13))
_NOISE = 1e2 * np.finfo(float).eps


def check_symmetry_defect() -> CheckResult:
    toy = ToyODE(u0=1.0)
    u0 = toy.initial_state()
    out, ok = [], True
    for label, scheme, need in (("strang", SchemeSpec.strang(), 1.8), ("iterated-strang(4)", SchemeSpec.iterated_strang(4), 3.7)):
        d = [symmetry_defect(toy, scheme, t, u0) for t in DEFECT_TAUS]
        s = loglog_slope(DEFECT_TAUS, d, _NOISE)
        ok &= s >= need
        out.append(f"{label} slope {s:.2f} (need >= {need})")
    return CheckResult("symmetry defect", bool(ok), "; ".join(out))


def iterate_limit_errors(problem, taus, u0, i, reference_iterations=12, kind=None):
    kind = problem.norm_kind if kind is None else NormKind.parse(kind)
    errs = []
    for tau in taus:
        a, _ = step(problem, SchemeSpec.iterated_strang(i), tau, u0)
        b, _ = step(problem, SchemeSpec.iterated_strang(reference_iterations), tau, u0)
        errs.append(norm(a - b, kind))
    return errs


def check_iterate_order() -> CheckResult:
    toy = ToyODE(u0=1.0)
    u0 = toy.initial_state()
    out, ok = [], True
    for i in (1, 2, 3):
        s = loglog_slope(DEFECT_TAUS, iterate_limit_errors(toy, DEFECT_TAUS, u0, i), _NOISE)
        ok &= s >= i + 0.7
        out.append(f"i={i} slope {s:.2f}")
    return CheckResult("iterate-limit order", bool(ok), "; ".join(out))


CHECKS: dict[str, Callable[[], CheckResult]] = {
    "phi-recursion": check_phi_recursion,
    "phi1-small": check_phi1_small,
    "gammas": check_gammas,
    "contraction": check_contraction,
    "symmetry-defect": check_symmetry_defect,
    "iterate-order": check_iterate_order,
}


def run_all(names=None) -> list[CheckResult]:
    names = list(CHECKS) if names is None else names
    results = []
    for name in names:
        try:
            results.append(CHECKS[name]())
        except Exception as exc:  # a crashing check is a failed check
            results.append(CheckResult(name, False, f"raised {type(exc).__name__}: {exc}"))
    return results
