"""Exception hierarchy shared by the engine, the estimators and the CLI."""


class EmError(Exception):
    """Base class for all estimator errors."""

    code = "em_error"


class ConstraintViolation(EmError, ValueError):
    code = "constraint_violation"


class DegenerateInput(EmError, ValueError):
    code = "degenerate_input"


class ImpossibleData(EmError, ValueError):
    """Observed data has zero probability under the current parameters."""

    code = "impossible_data"


class MendelianViolation(EmError, ValueError):
    code = "mendelian_violation"


class NumericalFailure(EmError, ArithmeticError):
    """Non-finite log-likelihood or a likelihood decrease beyond the slack."""

    code = "numerical_failure"

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class ParseError(EmError, ValueError):
    """Malformed input file; carries the location of the offending field."""

    code = "parse_error"

    def __init__(self, message, path=None, line=None, column=None):
        loc = ":".join(str(x) for x in (path, line, column) if x is not None)
        super().__init__(f"{loc}: {message}" if loc else message)
        self.path = path
        self.line = line
        self.column = column
