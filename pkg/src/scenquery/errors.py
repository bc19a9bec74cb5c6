"""Exception hierarchy shared by all scenquery modules."""


class ScenQueryError(Exception):
    """Base class for all scenquery errors."""


class SchemaError(ScenQueryError):
    """Trace file violates the JSON schema; carries a JSON-pointer path."""

    def __init__(self, pointer, message):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
        self.message = message


class InvariantError(ScenQueryError):
    """A structural invariant of the trace model is violated."""


class AlphabetError(ScenQueryError):
    """An action label outside the configured alphabet was encountered."""


class LexError(ScenQueryError):
    def __init__(self, message, span=None):
        super().__init__(message)
        self.span = span


class ParseError(ScenQueryError):
    """Parse failure; carries the collected diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        first = self.diagnostics[0] if self.diagnostics else None
        super().__init__(str(first) if first else "parse error")


class UnsupportedConstruct(ScenQueryError):
    def __init__(self, message, span=None):
        super().__init__(message)
        self.span = span


class CycleError(ScenQueryError):
    """Recursive behavior invocation."""


class UnboundAgent(ScenQueryError):
    """A condition references an agent missing from the correspondence."""


class MissingMap(ScenQueryError):
    """A region predicate was evaluated on a trace without map regions."""


class StreamMismatch(ScenQueryError):
    """Predicate streams and observed actions disagree on length."""


class BudgetExceeded(ScenQueryError):
    """A configured search budget (configs, enumeration, wall clock) ran out."""
