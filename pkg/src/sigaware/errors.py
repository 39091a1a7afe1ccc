"""Exception types shared across the toolkit."""


class SigawareError(Exception):
    """Base class for all toolkit errors."""


class LexError(SigawareError):
    """Character outside the language alphabet."""

    def __init__(self, position: int, char: str):
        super().__init__(f"illegal character {char!r} at offset {position}")
        self.position = position
        self.char = char


class ParseError(SigawareError):
    """Token stream does not form a program; carries the first offending token index."""

    def __init__(self, token_index: int, message: str):
        super().__init__(f"parse error at token {token_index}: {message}")
        self.token_index = token_index


class UnknownMetric(SigawareError):
    """Requested metric name is not a complexity-vector field."""


class OracleFailedOnInput(SigawareError):
    """The reduction oracle rejected the full input sequence."""


class AnalysisBudgetExceeded(SigawareError):
    """Abstract interpretation exceeded its step budget."""


class DecoyCollision(SigawareError):
    """Decoy identifier already occurs in a sample."""


class DivergenceError(SigawareError):
    """Training loss became non-finite."""


class TestSetMismatch(SigawareError):
    """Outcome runs to intersect were not computed over the same test set."""


class DataError(SigawareError):
    """Malformed input file or schema violation."""
