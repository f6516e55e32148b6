class MinimaxError(Exception):
    """Base class for every error raised by the minimax app."""


class DimensionMismatch(MinimaxError, ValueError):
    pass


class EmptyInputError(MinimaxError, ValueError):
    pass


class NonFiniteError(MinimaxError, ValueError):
    pass


class LimitExceeded(MinimaxError):
    """A brute-force oracle or grid would exceed its configured size limit."""


class ConvergenceError(MinimaxError):
    pass


class OperatorEvaluationError(MinimaxError):
    """Evaluating an operator handle failed; `point` is the offending input."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class ContractViolation(MinimaxError):
    """
    A caller-side hypothesis turned out to be false while computing,
    e.g. an operator that is not additively homogeneous.

    `residual` is the measured defect, `point` the input that exposed it.
    """

    def __init__(self, message, residual=None, point=None):
        super().__init__(message)
        self.residual = residual
        self.point = point


class EmptyRepresentation(MinimaxError):
    """Every outer point of some state was dropped while building a representation."""

    def __init__(self, message, state=None, dropped=0):
        super().__init__(message)
        self.state = state
        self.dropped = dropped


class AxiomPrecheckFailed(MinimaxError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class GameSpecError(MinimaxError, ValueError):
    """A game specification breaks a structural rule (row sums, empty action sets)."""
