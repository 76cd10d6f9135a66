"""Scalar toy problem ``u' = u^2`` split with ``A = 0`` and ``b(u) w = u w``.

Every grid node carries an independent copy of the ODE, so backward steps
are harmless and the exact solution ``u0 / (1 - u0 t)`` is available.
"""

from __future__ import annotations

import numpy as np

from ..field import NormKind, State, build_grid
from ..splitting import SplitProblem

__all__ = ["ToyODE"]


class ToyODE(SplitProblem):
    name = "toy-ode"
    norm_kind = NormKind.INF
    backward_stable = True
    n_components = 1

    def __init__(self, u0=1.0, n=8):
        self.grid = build_grid(1, n, (0.0, 1.0))
        self.u0 = np.broadcast_to(np.asarray(u0, dtype=np.complex128), self.grid.shape)

    def linear_propagate(self, sigma, state):
        return state

    def nonlinear_propagate(self, sigma, u_star, state, tol=None):
        with np.errstate(over="ignore", invalid="ignore"):
            out = np.exp(complex(sigma) * u_star.data) * state.data
        return state.like(out)

    def initial_state(self):
        return State(self.grid, self.u0)

    def exact_solution(self, t):
        return State(self.grid, self.u0 / (1 - self.u0 * t))
