"""Exception taxonomy for chernlab.

Every failure mode of the numerical engine gets its own class so callers
(and the CLI) can map errors to exit codes and reports without string
matching.
"""


class ChernLabError(Exception):
    """Base class for all chernlab errors."""


class DomainViolation(ChernLabError):
    """A point (or a finite-difference stencil node) left the chart domain."""


class NonHermitian(ChernLabError):
    """A metric evaluator returned a matrix violating Hermitian symmetry."""


class NotConverged(ChernLabError):
    """Step refinement failed to reduce a derivative error estimate."""


class SingularMetric(ChernLabError):
    """Metric condition number exceeds the configured bound; inversion refused."""


class InsufficientJet(ChernLabError):
    """An operation required more derivative orders than the jet carries."""


class IndefiniteRho(ChernLabError):
    """Chern-Ricci form has a significantly negative eigenvalue."""


class IntegrationDiverged(ChernLabError):
    """Adaptive ODE step control failed to reach the requested tolerance."""


class DependentFields(ChernLabError):
    """Vector fields are numerically linearly dependent where independence is required."""


class DegenerateQuotient(ChernLabError):
    """Subalgebra equals the whole algebra; the quotient is zero-dimensional."""


class UnknownModel(ChernLabError):
    """Requested model name is not in the registry."""


class BadParams(ChernLabError):
    """Model parameters violate their declared constraints."""


class PositivityLost(ChernLabError):
    """A flow metric stopped being positive definite.

    Carries the bracketing interval of the crossing time.
    """

    def __init__(self, t_low, t_high, message=None):
        self.t_low = float(t_low)
        self.t_high = float(t_high)
        super().__init__(
            message
            or f"metric lost positive definiteness between t={t_low:.6g} and t={t_high:.6g}"
        )


class StepTooLarge(ChernLabError):
    """Quadratic-in-epsilon error dominates a variation difference quotient."""


class ConfigError(ChernLabError):
    """Invalid run configuration (CLI exit code 2)."""
