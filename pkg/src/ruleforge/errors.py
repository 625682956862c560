"""
Exception hierarchy for ruleforge.

Library code signals operator inapplicability and non-covering examples as
values; the exceptions here are for malformed input and caller errors.
"""


class RuleforgeError(Exception):
    """Base class for every error raised by ruleforge."""


class ParseError(RuleforgeError):
    """Raised when term, rule or problem text cannot be parsed."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f" (line {line}" + (f", column {column})" if column is not None else ")")
        super().__init__(f"{message}{location}")


class InvalidPosition(RuleforgeError):
    """Raised when a rule position does not resolve in a rule."""


class StructuralPositionError(InvalidPosition):
    """Raised when deleting a node that is not a guard conjunct or body item."""


class BackgroundError(RuleforgeError):
    """Base class for background-function evaluation failures."""


class UnknownFunction(BackgroundError):
    pass


class ArityMismatch(BackgroundError):
    pass


class DomainError(BackgroundError):
    """The function is undefined on its arguments; the redex is stuck."""


class BudgetExceeded(RuleforgeError):
    """Normalization ran out of rewrite steps or term depth."""


class ProblemError(RuleforgeError):
    """A problem definition is inconsistent (duplicate op id, empty E+, ...)."""


class PolicyFileError(RuleforgeError):
    """Raised when a Q-table CSV file is malformed."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(f"{message}{suffix}")


class EmptyPopulation(RuleforgeError):
    pass


class ConfigError(RuleforgeError):
    pass
