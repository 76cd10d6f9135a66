"""Two-dimensional Brusselator reaction-diffusion system on the periodic unit square.

    u_t = alpha Lap u + (u v - beta) u + delta
    v_t = alpha Lap v - u^2 v + gamma u

Split as ``A = alpha Lap`` (per component) and the frozen reaction matrix
``b(u*, v*) = [[u* v* - beta, 0], [gamma, -u*^2]]`` with ``d = [delta, 0]``.
Storage is component-major: component 0 is ``u``, component 1 is ``v``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import UnstableStepError
from ..field import Grid, NormKind, State, apply_multiplier, build_grid, eval_on_grid
from ..phi import phi, phi1_divided_difference
from ..splitting import SplitProblem

__all__ = [
    "BrusselatorParams",
    "Brusselator",
    "reaction_flow",
    "brusselator_initial",
    "brusselator_linear_propagate",
    "brusselator_nonlinear_propagate",
]


@dataclass(frozen=True)
class BrusselatorParams:
    alpha: float = 1e-2
    beta: float = 4.4
    gamma: float = 3.4
    delta: float = 1.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"diffusion coefficient must be positive, got {self.alpha}")


def reaction_flow(sigma, a, c, g, delta, w1, w2):
    """Exact flow of ``w' = [[a, 0], [g, c]] w + [delta, 0]`` over time ``sigma``.

    All arguments broadcast elementwise. The off-diagonal entries of
    ``exp(sigma M)`` and ``phi_1(sigma M)`` are divided differences; they are
    written as ``sigma e^{sigma c} phi_1(sigma (a - c))`` and
    ``sigma phi_1[sigma a, sigma c]`` so that ``a == c`` needs no special case.
    """
    x = sigma * a
    y = sigma * c
    ex = np.exp(x)
    ey = np.exp(y)
    out1 = ex * w1 + sigma * phi(1, x) * delta
    exp_offdiag = sigma * ey * phi(1, x - y)
    phi_offdiag = sigma * phi1_divided_difference(x, y)
    out2 = ey * w2 + g * exp_offdiag * w1 + sigma * g * phi_offdiag * delta
    return out1, out2


class Brusselator(SplitProblem):
    """Brusselator split into diffusion and a frozen linear reaction.

    ``overflow_guard`` bounds the amplification ``max_k |exp(-sigma alpha |k|^2)|``
    that a single diffusion substep may apply; backward (negative real part)
    substeps that exceed it raise :class:`UnstableStepError`.
    """

    name = "brusselator"
    norm_kind = NormKind.INF
    backward_stable = False
    n_components = 2

    def __init__(self, n=128, params: BrusselatorParams = BrusselatorParams(), overflow_guard=1e8, grid: Grid = None):
        self.params = params
        self.grid = grid if grid is not None else build_grid(2, n, (0.0, 1.0))
        if self.grid.dim != 2:
            raise ValueError("the Brusselator lives on a 2-D grid")
        self.overflow_guard = float(overflow_guard)
        kx, ky = self.grid.wavevector
        self._ksq = kx**2 + ky**2
        self._ksq_max = float(self._ksq.max())

    def linear_propagate(self, sigma, state):
        sigma = complex(sigma)
        if sigma == 0:
            return state
        growth = -sigma.real * self.params.alpha * self._ksq_max
        if growth > np.log(self.overflow_guard):
            raise UnstableStepError(
                f"backward diffusion substep sigma={sigma:.4g} amplifies modes by e^{growth:.1f}"
                f" (guard {self.overflow_guard:.1e})"
            )
        return apply_multiplier(state, np.exp(-sigma * self.params.alpha * self._ksq))

    def nonlinear_propagate(self, sigma, u_star, state, tol=None):
        p = self.params
        us, vs = u_star.data
        a = us * vs - p.beta
        c = -(us * us)
        with np.errstate(over="ignore", invalid="ignore"):
            w1, w2 = reaction_flow(sigma, a, c, p.gamma, p.delta, state.data[0], state.data[1])
        out = np.empty_like(state.data)
        out[0] = w1
        out[1] = w2
        if not np.isfinite(out).all():
            raise UnstableStepError(f"reaction flow overflowed for sigma={sigma}")
        return state.like(out)

    def initial_state(self):
        return brusselator_initial(self.grid)


def brusselator_initial(grid: Grid) -> State:
    """``u0 = 22 y (1-y)^{3/2} (1 + cos 10 pi x)``, ``v0 = 27 x (1-x)^{3/2} (1 + sin 10 pi x)``."""
    return eval_on_grid(
        [
            lambda x, y: 22 * y * (1 - y) ** 1.5 * (1 + np.cos(10 * np.pi * x)),
            lambda x, y: 27 * x * (1 - x) ** 1.5 * (1 + np.sin(10 * np.pi * x)),
        ],
        grid,
        n_components=2,
    )


def brusselator_linear_propagate(params: BrusselatorParams, sigma, state: State) -> State:
    """Diffusion substep on the grid of ``state``."""
    return Brusselator(params=params, grid=state.grid).linear_propagate(sigma, state)


def brusselator_nonlinear_propagate(params: BrusselatorParams, sigma, u_star: State, state: State) -> State:
    """Frozen reaction substep on the grid of ``state``."""
    return Brusselator(params=params, grid=state.grid).nonlinear_propagate(sigma, u_star, state)
