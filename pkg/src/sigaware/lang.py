"""Public surface of the mini language: tokenize, parse, verify, render.

All four operations are pure.  ``verify`` models compilability: a program
is valid when it parses, every used name is declared before use, indexed
names are declared arrays, and expressions are integer-typed.
Uninitialized reads are allowed.
"""

from __future__ import annotations

from sigaware import _backend
from sigaware.astnodes import Ast, ValidityReport
from sigaware.tokens import Token

_impl = _backend.lang_impl


def tokenize(text: str) -> list[Token]:
    return _impl.tokenize(text)


def parse(tokens: list[Token]) -> Ast:
    return _impl.parse(tokens)


def verify(tokens: list[Token]) -> ValidityReport:
    return _impl.verify(tokens)


def check_program(tokens: list[Token]) -> tuple[ValidityReport, Ast | None]:
    """verify plus the parsed AST when valid; one pass for oracle loops."""
    return _impl.check_program(tokens)


def render(tokens: list[Token]) -> str:
    return _impl.render(tokens)
