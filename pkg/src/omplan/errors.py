"""Exception hierarchy shared by all omplan modules."""


class OmplanError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(OmplanError):
    """Malformed input text. Carries 1-based line/column when known."""

    def __init__(self, message, line=None, column=None, source=None):
        self.line = line
        self.column = column
        self.source = source
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
            if column is not None:
                where += f"{column}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class UnsupportedConstruct(OmplanError):
    """Input uses a language feature outside the supported fragment."""


class ValidationError(OmplanError):
    """Well-formed input that violates a structural constraint."""


class ReasonerBudgetExceeded(OmplanError):
    """The tableau hit its node budget before reaching a verdict."""


class NoJustification(OmplanError):
    """A justification was requested for a consistent axiom set."""


class StaticOntologyInconsistent(OmplanError):
    """The static ontology is inconsistent on its own."""


class ContractViolation(OmplanError):
    """A caller broke an operation's precondition."""


class TimeLimitExceeded(OmplanError):
    """A cooperative deadline passed."""
