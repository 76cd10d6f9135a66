"""Concrete split problems."""

from .brusselator import (
    Brusselator,
    BrusselatorParams,
    brusselator_initial,
    brusselator_linear_propagate,
    brusselator_nonlinear_propagate,
    reaction_flow,
)
from .kdv import (
    KdV,
    KdVConfig,
    KdVInitial,
    kdv_initial,
    kdv_linear_propagate,
    kdv_nonlinear_propagate,
    kdv_soliton_exact,
)
from .toy import ToyODE

__all__ = [
    "Brusselator",
    "BrusselatorParams",
    "brusselator_initial",
    "brusselator_linear_propagate",
    "brusselator_nonlinear_propagate",
    "reaction_flow",
    "KdV",
    "KdVConfig",
    "KdVInitial",
    "kdv_initial",
    "kdv_soliton_exact",
    "kdv_linear_propagate",
    "kdv_nonlinear_propagate",
    "ToyODE",
]
