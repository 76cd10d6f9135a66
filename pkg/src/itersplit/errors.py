"""Exception hierarchy shared by the propagators, schemes and the study driver."""


class SplittingError(Exception):
    """Numerical failure raised while advancing a splitting scheme.

    ``kind`` is a short machine-readable tag; ``step_index`` is filled in by
    the time-integration driver when the failure happens inside a trajectory.
    """

    kind = "NUMERICAL"

    def __init__(self, message, step_index=None):
        super().__init__(message)
        self.step_index = step_index

    def with_step(self, step_index):
        self.step_index = step_index
        return self


class DivergenceError(SplittingError):
    """The fixed-point iteration of the iterated Strang step stopped contracting."""

    kind = "DIVERGENCE"


class UnstableStepError(SplittingError):
    """A propagator would amplify some mode beyond the overflow guard."""

    kind = "UNSTABLE"


class FlowFailureError(SplittingError):
    """The inner integrator of a numerically computed partial flow failed."""

    kind = "FLOW_FAILURE"


class NonFiniteStateError(SplittingError, ValueError):
    """A state contains NaN or Inf entries."""

    kind = "NONFINITE"


class ReferenceCheckError(SplittingError):
    """Two reference runs at different step sizes disagree above the requested floor."""

    kind = "REFERENCE"


class ConfigError(ValueError):
    """Invalid study or command-line configuration."""
