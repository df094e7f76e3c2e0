"""Exception types raised by the engine."""


class TripleParseError(ValueError):
    """A triple line did not have exactly three tab-separated fields."""

    def __init__(self, line_number: int, line: str):
        self.line_number = line_number
        self.line = line
        super().__init__(f"line {line_number}: expected 3 tab-separated fields, got: {line!r}")


class EmptyInputError(ValueError):
    """The triple source contained no triples at all."""


class NoCasesError(LookupError):
    """No prior cause/effect pair exists for the query's causal relation."""


class SplitError(RuntimeError):
    """Split construction could not satisfy its constraints."""
