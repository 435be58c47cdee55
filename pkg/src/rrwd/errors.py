"""Exception hierarchy shared by every module of the engine."""


class EngineError(Exception):
    """Base class for all engine errors."""


class MixedVariableTables(EngineError):
    pass


class NonzeroConstantTerm(EngineError):
    pass


class DivisionRemainderNonzero(EngineError):
    """A polynomial expected to be divisible by a variable was not.

    Inside the engine this means a class that should be supported on a zero
    section is not, so it is treated as an identity violation.
    """


class TruncationExceeded(EngineError):
    pass


class NegativeSignInput(EngineError):
    pass


class RankGuardExceeded(EngineError):
    pass


class NonIntegralResult(EngineError):
    pass


class NonSymmetricInput(EngineError):
    pass


class RankSamplesInsufficient(EngineError):
    pass


class StabilizationFailure(EngineError):
    pass


class NonIntegralEvaluation(EngineError):
    pass


class TowerTooLarge(EngineError):
    pass


class PaperIdentityViolation(EngineError):
    """Two independently computed sides of a Riemann-Roch identity differ."""

    def __init__(self, message, lhs=None, rhs=None):
        super().__init__(message)
        self.lhs = lhs
        self.rhs = rhs


class CheckFailed(EngineError):
    def __init__(self, message, lhs=None, rhs=None):
        super().__init__(message)
        self.lhs = lhs
        self.rhs = rhs


class ExprSyntaxError(EngineError):
    """Parse error carrying a 1-based line and column."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class UnknownModel(EngineError):
    pass


class ArityMismatch(EngineError):
    pass
