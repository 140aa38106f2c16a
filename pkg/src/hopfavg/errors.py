"""Exception hierarchy shared by every stage of the pipeline.

Each class carries a short machine-readable ``code`` that the command line
front end serializes into reports.
"""


class HopfAvgError(Exception):
    code = "error"


class EvaluationDomainError(HopfAvgError):
    code = "evaluation-domain"


class NotAFocusError(HopfAvgError):
    code = "not-a-focus"


class IntegrationError(HopfAvgError):
    """Raised when the adaptive step size collapses.

    The last successfully computed time and state are attached so callers can
    report how far the integration got.
    """

    code = "integration-failure"

    def __init__(self, message, t_last=None, state_last=None):
        super().__init__(message)
        self.t_last = t_last
        self.state_last = state_last


class NoEquilibriumError(HopfAvgError):
    code = "no-equilibrium"


class DegenerateEquilibriumError(HopfAvgError):
    code = "degenerate-equilibrium"


class NoHopfInBracketError(HopfAvgError):
    code = "no-hopf-in-bracket"


class TransversalityError(HopfAvgError):
    code = "transversality-failure"


class InternalConsistencyError(HopfAvgError):
    code = "internal-consistency"


class QuadratureError(HopfAvgError):
    code = "quadrature"


class HyperbolicityError(HopfAvgError):
    code = "hyperbolicity-failure"


class BranchMismatchError(HopfAvgError):
    code = "branch-mismatch"


class DegenerateKError(HopfAvgError):
    code = "degenerate-K"


class OrbitNotFoundError(HopfAvgError):
    code = "orbit-not-found"


class InvalidParametersError(HopfAvgError, ValueError):
    code = "invalid-parameters"


class NoCoexistenceError(InvalidParametersError):
    code = "no-coexistence"


class ConfigError(HopfAvgError, ValueError):
    code = "config"
