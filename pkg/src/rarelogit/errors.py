"""Exception hierarchy.

Every error carries a short machine-readable ``code`` and the process exit
status the CLI uses for it (2 config/parse, 3 numerical, 4 overflow).
"""


class RareLogitError(Exception):
    code = "ERROR"
    exit_status = 3


class DomainError(RareLogitError, ValueError):
    code = "DOMAIN_ERROR"
    exit_status = 2


class ParseError(RareLogitError, ValueError):
    code = "PARSE_ERROR"
    exit_status = 2


class InvalidModel(RareLogitError, ValueError):
    code = "INVALID_MODEL"
    exit_status = 2


class EmptyInput(RareLogitError, ValueError):
    code = "EMPTY_INPUT"
    exit_status = 2


class UnsupportedDimension(RareLogitError, ValueError):
    code = "UNSUPPORTED_DIMENSION"
    exit_status = 2


class NotPositiveDefinite(RareLogitError, ArithmeticError):
    code = "NOT_POSITIVE_DEFINITE"


class DegenerateHessian(NotPositiveDefinite):
    code = "DEGENERATE_HESSIAN"


class MomentOverflow(RareLogitError, OverflowError):
    code = "MOMENT_OVERFLOW"
    exit_status = 4


class SeparationSuspected(RareLogitError, ArithmeticError):
    code = "SEPARATION_SUSPECTED"


class MaxIterations(RareLogitError, ArithmeticError):
    code = "MAX_ITERATIONS"


class NoInteriorSolution(RareLogitError, ArithmeticError):
    code = "NO_INTERIOR_SOLUTION"


class LimitSolveFailed(RareLogitError, ArithmeticError):
    code = "LIMIT_SOLVE_FAILED"
