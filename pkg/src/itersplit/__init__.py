"""Operator splitting for ``u' = A u + b(u) u + d`` with iterated Strang and triple-jump compositions."""

from .errors import (
    ConfigError,
    DivergenceError,
    FlowFailureError,
    NonFiniteStateError,
    ReferenceCheckError,
    SplittingError,
    UnstableStepError,
)
from .field import Grid, NormKind, State, apply_multiplier, build_grid, eval_on_grid, load_state, norm, save_state
from .phi import phi, phi1_divided_difference, phi_k
from .problems import Brusselator, BrusselatorParams, KdV, KdVConfig, ToyODE, kdv_soliton_exact
from .splitting import (
    FunctionProblem,
    SchemeKind,
    SchemeSpec,
    SplitProblem,
    StepDiagnostics,
    compose_step,
    iterated_strang_step,
    lie_step,
    step,
    strang_step,
    symmetry_defect,
    triple_jump_coefficients,
)
from .study import (
    ExactSolution,
    SelfReference,
    StudyConfig,
    StudyResult,
    fit_order,
    integrate,
    reference_solution,
    run_study,
    write_csv,
)

__version__ = "0.1.0"
