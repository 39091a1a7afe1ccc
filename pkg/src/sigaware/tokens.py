"""Token model for the mini language.

Token kinds follow the language surface: ``keyword``, ``identifier``,
``int-literal``, ``operator`` and ``punct``.  A token's ``index`` is its
ordinal position in the sequence it was produced in; parsing never relies
on it, so slices of a token list remain parseable.
"""

from __future__ import annotations

from dataclasses import dataclass

KEYWORD = "keyword"
IDENTIFIER = "identifier"
INT_LITERAL = "int-literal"
OPERATOR = "operator"
PUNCT = "punct"

KEYWORDS = frozenset({"void", "int", "if", "else", "for", "while"})
OPERATORS = frozenset({"+", "-", "*", "=", "<", "<=", ">", ">=", "==", "!="})
PUNCTS = frozenset({"(", ")", "{", "}", "[", "]", ";", ","})


@dataclass(slots=True)
class Token:
    kind: str
    text: str
    index: int

    def signature(self) -> tuple[str, str]:
        return (self.kind, self.text)


def signatures(tokens: list[Token]) -> tuple[tuple[str, str], ...]:
    """Kind/text view of a token sequence, the equality used by round-trip checks."""
    return tuple((t.kind, t.text) for t in tokens)


def texts(tokens: list[Token]) -> tuple[str, ...]:
    return tuple(t.text for t in tokens)


def reindex(tokens: list[Token]) -> list[Token]:
    """Fresh copies numbered 0..n-1, for token lists assembled from slices."""
    return [Token(t.kind, t.text, i) for i, t in enumerate(tokens)]
