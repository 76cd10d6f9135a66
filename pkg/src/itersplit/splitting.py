"""One-step splitting schemes for ``u' = A u + b(u) u + d``.

A :class:`SplitProblem` provides the two partial flows: the linear
propagator ``exp(sigma A)`` and the frozen-coefficient propagator
``phi_sigma^{b(u_star)}``, i.e. the exact flow of ``w' = b(u_star) w + d``.
Step sizes may be complex so that compositions with complex coefficients
reuse the same code path.
"""

from __future__ import annotations

import cmath
import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DivergenceError, NonFiniteStateError, UnstableStepError
from .field import Grid, NormKind, State, norm

__all__ = [
    "SplitProblem",
    "FunctionProblem",
    "SchemeKind",
    "SchemeSpec",
    "StepDiagnostics",
    "lie_step",
    "strang_step",
    "iterated_strang_step",
    "compose_step",
    "step",
    "symmetry_defect",
    "triple_jump_coefficients",
]

log = logging.getLogger(__name__)


class SplitProblem:
    """Base class for a problem whose two partial flows can be evaluated.

    Subclasses set ``grid`` and ``n_components`` and implement
    :meth:`linear_propagate` and :meth:`nonlinear_propagate`.
    """

    name = "problem"
    norm_kind = NormKind.L2
    #: advisory bound on the Lipschitz constant of ``b``; only used for warnings
    lipschitz_hint: Optional[float] = None
    #: the continuous problem has real solutions (enables real projection)
    real_valued = True
    #: backward (negative real) substeps are well posed
    backward_stable = True
    #: default tolerance for numerically computed partial flows
    default_inner_tol = 1e-12

    grid: Grid
    n_components: int

    def linear_propagate(self, sigma, state: State) -> State:
        raise NotImplementedError

    def nonlinear_propagate(self, sigma, u_star: State, state: State, tol=None) -> State:
        raise NotImplementedError

    def initial_state(self) -> State:
        raise NotImplementedError

    def exact_solution(self, t) -> Optional[State]:
        """Exact solution at time ``t`` if known, else ``None``."""
        return None


class FunctionProblem(SplitProblem):
    """A :class:`SplitProblem` assembled from two callables.

    ``linear(sigma, state)`` and ``nonlinear(sigma, u_star, state, tol)``
    must return new states.
    """

    def __init__(
        self,
        grid: Grid,
        linear: Callable,
        nonlinear: Callable,
        *,
        n_components=1,
        name="function-problem",
        norm_kind=NormKind.L2,
        lipschitz_hint=None,
        real_valued=True,
        backward_stable=True,
        initial=None,
        exact=None,
    ):
        self.grid = grid
        self.n_components = n_components
        self._linear = linear
        self._nonlinear = nonlinear
        self.name = name
        self.norm_kind = norm_kind
        self.lipschitz_hint = lipschitz_hint
        self.real_valued = real_valued
        self.backward_stable = backward_stable
        self._initial = initial
        self._exact = exact

    def linear_propagate(self, sigma, state):
        return self._linear(sigma, state)

    def nonlinear_propagate(self, sigma, u_star, state, tol=None):
        return self._nonlinear(sigma, u_star, state, tol)

    def initial_state(self):
        if self._initial is None:
            raise NotImplementedError("no initial state configured")
        return self._initial

    def exact_solution(self, t):
        return None if self._exact is None else self._exact(t)


class SchemeKind(enum.Enum):
    LIE = "lie"
    STRANG = "strang"
    ITERATED_STRANG = "iterated-strang"
    COMPOSITION = "composition"


@dataclass(frozen=True)
class SchemeSpec:
    """Description of a one-step method.

    ``fixed_point_tol = 0`` runs exactly ``iterations`` fixed-point
    iterations; a positive value stops early once an increment drops below
    ``fixed_point_tol * max(1, ||v||)``. ``inner_tol = None`` defers to the
    problem's default tolerance.
    """

    kind: SchemeKind
    iterations: int = 1
    base: Optional["SchemeSpec"] = None
    gammas: tuple = ()
    fixed_point_tol: float = 0.0
    inner_tol: Optional[float] = None

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if self.fixed_point_tol < 0:
            raise ValueError("fixed_point_tol must be >= 0")
        if self.kind is SchemeKind.COMPOSITION:
            if self.base is None or not self.gammas:
                raise ValueError("a composition needs a base scheme and coefficients")
            gammas = tuple(complex(g) for g in self.gammas)
            if abs(sum(gammas) - 1) > 1e-14:
                raise ValueError(f"composition coefficients must sum to 1, got {sum(gammas)}")
            object.__setattr__(self, "gammas", gammas)

    @classmethod
    def lie(cls, **kw):
        return cls(SchemeKind.LIE, **kw)

    @classmethod
    def strang(cls, **kw):
        return cls(SchemeKind.STRANG, **kw)

    @classmethod
    def iterated_strang(cls, i, **kw):
        return cls(SchemeKind.ITERATED_STRANG, iterations=i, **kw)

    @classmethod
    def composition(cls, base, gammas, **kw):
        return cls(SchemeKind.COMPOSITION, base=base, gammas=tuple(gammas), **kw)

    @property
    def is_complex(self) -> bool:
        """True if any (possibly nested) substep has a non-real coefficient."""
        if self.kind is SchemeKind.COMPOSITION:
            return any(g.imag != 0 for g in self.gammas) or self.base.is_complex
        return False

    @property
    def label(self) -> str:
        if self.kind is SchemeKind.ITERATED_STRANG:
            return f"iterated-strang({self.iterations})"
        if self.kind is SchemeKind.COMPOSITION:
            coeffs = "complex" if any(g.imag != 0 for g in self.gammas) else "real"
            return f"composition[{self.base.label};{len(self.gammas)};{coeffs}]"
        return self.kind.value


@dataclass
class StepDiagnostics:
    """Fixed-point bookkeeping of one (or several merged) steps.

    For a single step ``len(fixed_point_increments) == iterations_used - 1``;
    merging ``steps`` single-step records keeps
    ``len(fixed_point_increments) == iterations_used - steps``.
    """

    fixed_point_increments: list = field(default_factory=list)
    iterations_used: int = 1
    warnings: list = field(default_factory=list)
    steps: int = 1

    @classmethod
    def merge(cls, parts: Sequence["StepDiagnostics"]) -> "StepDiagnostics":
        out = cls(iterations_used=0, steps=0)
        for p in parts:
            out.fixed_point_increments.extend(p.fixed_point_increments)
            out.iterations_used += p.iterations_used
            out.warnings.extend(p.warnings)
            out.steps += p.steps
        return out


def _time(x):
    """Collapse complex step sizes with zero imaginary part to floats."""
    x = complex(x)
    return x.real if x.imag == 0 else x


def _inner_tol(problem, tol):
    return problem.default_inner_tol if tol is None else tol


def lie_step(problem: SplitProblem, tau, u0: State, inner_tol=None) -> State:
    """``phi_tau^{b(u0)}(exp(tau A) u0)``; the coefficient is frozen at the input."""
    tau = _time(tau)
    tol = _inner_tol(problem, inner_tol)
    return problem.nonlinear_propagate(tau, u0, problem.linear_propagate(tau, u0), tol)


def strang_step(problem: SplitProblem, tau, u0: State, inner_tol=None) -> State:
    """Classic Strang step.

    ``u_half = phi_{tau/2}^{b(u0)}(exp(tau/2 A) u0)`` and
    ``u1 = exp(tau/2 A) phi_tau^{b(u_half)}(exp(tau/2 A) u0)``.
    """
    tau = _time(tau)
    half = _time(tau / 2)
    tol = _inner_tol(problem, inner_tol)
    v0 = problem.linear_propagate(half, u0)
    u_half = problem.nonlinear_propagate(half, u0, v0, tol)
    return problem.linear_propagate(half, problem.nonlinear_propagate(tau, u_half, v0, tol))


def _divergence_noise(problem, tol, scale):
    # increments below this level are treated as round-off/inner-solver noise
    return 10.0 * max(tol, np.finfo(float).eps) * max(1.0, scale)


def iterated_strang_step(
    problem: SplitProblem,
    tau,
    u0: State,
    i: int,
    *,
    fixed_point_tol=0.0,
    inner_tol=None,
    norm_kind=None,
):
    """Iterated Strang step with ``i`` fixed-point iterations.

    The half step ``u_half = phi_{tau/2}^{b(u0)}(exp(tau/2 A) u0)`` is computed
    once; the iteration map is ``F(v) = exp(tau/2 A) phi_{tau/2}^{b(v)}(u_half)``
    started from ``v1 = F(u_half)``. Returns ``(state, StepDiagnostics)``.

    Raises :class:`DivergenceError` when the increment norm grows over two
    consecutive iterations (above the inner-solver noise level) or when an
    iterate overflows.
    """
    if i < 1:
        raise ValueError(f"need at least one iteration, got {i}")
    tau = _time(tau)
    half = _time(tau / 2)
    tol = _inner_tol(problem, inner_tol)
    kind = problem.norm_kind if norm_kind is None else NormKind.parse(norm_kind)
    diag = StepDiagnostics(iterations_used=1)

    if problem.lipschitz_hint is not None and problem.lipschitz_hint * abs(tau) >= 1:
        msg = f"step {abs(tau):.3g} exceeds the advisory contraction bound 1/L = {1 / problem.lipschitz_hint:.3g}"
        diag.warnings.append(msg)
        log.warning(msg)

    def F(v):
        return problem.linear_propagate(half, problem.nonlinear_propagate(half, v, u_half, tol))

    u_half = problem.nonlinear_propagate(half, u0, problem.linear_propagate(half, u0), tol)
    v = F(u_half)
    incs = diag.fixed_point_increments
    for _ in range(1, i):
        try:
            v_new = F(v)
        except NonFiniteStateError as exc:
            raise DivergenceError(f"fixed-point iterate overflowed after {diag.iterations_used} iterations at tau={tau}") from exc
        inc = norm(v_new - v, kind)
        incs.append(inc)
        v = v_new
        diag.iterations_used += 1
        if len(incs) >= 3 and incs[-1] > incs[-2] > incs[-3]:
            if incs[-1] > _divergence_noise(problem, tol, norm(v, kind)):
                raise DivergenceError(
                    f"fixed-point increments grew twice in a row ({incs[-3]:.3e} -> {incs[-2]:.3e} -> {incs[-1]:.3e})"
                    f" at tau={tau}"
                )
        if fixed_point_tol > 0 and inc <= fixed_point_tol * max(1.0, norm(v, kind)):
            break
    return v, diag


def compose_step(problem: SplitProblem, base: SchemeSpec, gammas, tau, u0: State):
    """Apply ``base`` with substeps ``gamma_j * tau`` in order; zero coefficients are skipped."""
    tau = complex(tau)
    parts = []
    u = u0
    for g in gammas:
        g = complex(g)
        if g == 0:
            continue
        u, d = step(problem, base, _time(g * tau), u)
        parts.append(d)
    if not parts:
        return u0, StepDiagnostics(iterations_used=0, steps=0)
    return u, StepDiagnostics.merge(parts)


def step(problem: SplitProblem, scheme: SchemeSpec, tau, u0: State):
    """Advance ``u0`` by one step of ``scheme``; returns ``(state, StepDiagnostics)``."""
    kind = scheme.kind
    if kind is SchemeKind.LIE:
        return lie_step(problem, tau, u0, scheme.inner_tol), StepDiagnostics()
    if kind is SchemeKind.STRANG:
        return strang_step(problem, tau, u0, scheme.inner_tol), StepDiagnostics()
    if kind is SchemeKind.ITERATED_STRANG:
        return iterated_strang_step(
            problem,
            tau,
            u0,
            scheme.iterations,
            fixed_point_tol=scheme.fixed_point_tol,
            inner_tol=scheme.inner_tol,
        )
    if kind is SchemeKind.COMPOSITION:
        return compose_step(problem, scheme.base, scheme.gammas, tau, u0)
    raise ValueError(f"unknown scheme kind {kind}")


def symmetry_defect(problem: SplitProblem, scheme: SchemeSpec, tau, u0: State) -> float:
    """Round-trip defect ``||Phi_{-tau}(Phi_tau(u0)) - u0||`` in the problem's norm.

    Only meaningful when backward steps are well posed; parabolic problems
    raise :class:`UnstableStepError`.
    """
    if not problem.backward_stable:
        raise UnstableStepError(f"{problem.name}: backward steps are not well posed")
    forward, _ = step(problem, scheme, tau, u0)
    back, _ = step(problem, scheme, -tau, forward)
    return norm(back - u0, problem.norm_kind)


def triple_jump_coefficients(p: int = 2, mode: str = "real"):
    """Coefficients ``(g1, g2, g3)`` raising a symmetric order-``p`` method to order ``p + 2``.

    They solve ``g1 + g2 + g3 = 1`` and ``g1**(p+1) + g2**(p+1) + g3**(p+1) = 0``
    with ``g1 == g3``. ``mode='real'`` gives the unique real solution (with a
    negative middle step). ``mode='complex'`` replaces ``2**(1/(p+1))`` by
    ``2**(1/(p+1)) * w`` for a primitive ``(p+1)``-th root of unity ``w``,
    picking the smallest positive argument for which every coefficient has a
    positive real part.
    """
    if p < 2 or p % 2:
        raise ValueError(f"p must be an even integer >= 2, got {p}")
    mode = str(mode).lower()
    root = 2.0 ** (1.0 / (p + 1))
    if mode == "real":
        g1 = 1.0 / (2.0 - root)
        return complex(g1), complex(-root * g1), complex(g1)
    if mode != "complex":
        raise ValueError(f"mode must be 'real' or 'complex', got {mode!r}")
    for j in range(1, p + 1):
        if math.gcd(j, p + 1) != 1:
            continue
        w = cmath.exp(2j * math.pi * j / (p + 1))
        g1 = 1.0 / (2.0 - root * w)
        g2 = -root * w * g1
        if g1.real > 0 and g2.real > 0:
            return g1, g2, g1
    raise ValueError(f"no root of unity gives positive real parts for p={p}")
