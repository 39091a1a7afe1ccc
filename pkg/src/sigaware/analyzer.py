"""Exact bug detection and bug labeling for reduced programs.

``analyze`` runs an interval abstract interpretation and reports one
finding per out-of-bounds array, with certainty ``definite`` when every
possible index value is out of bounds (or the interval is fully outside)
and ``possible`` otherwise.  On closed programs, where every read is of
an initialized variable and loop bounds are constants within the unroll
cap, the interpretation is exact and no ``possible`` verdict arises.

``label`` compares a program against an original bug fingerprint, either
strictly (analyzer findings only) or leniently (falling back to checking
whether the original buggy access survived textually, a looser bound).
"""

from __future__ import annotations

from sigaware import _backend, lang
from sigaware.astnodes import Assign, Ast, For, If, Index, While
from sigaware.bugs import BugReport, Fingerprint
from sigaware.errors import DataError
from sigaware.tokens import Token

_impl = _backend.interval_impl

MAX_UNROLL = _impl.DEFAULT_MAX_UNROLL
STEP_BUDGET = _impl.DEFAULT_STEP_BUDGET

SAME_BUG = "same_bug"
BUG_FREE = "bug_free"
DIVERGENT = "divergent"


def analyze(ast: Ast, max_unroll: int = MAX_UNROLL, step_budget: int = STEP_BUDGET) -> list[BugReport]:
    """Findings for a verified AST, aggregated per (kind, array)."""
    raw = _impl.analyze_function(ast, max_unroll, step_budget)
    return [BugReport(kind, array, certainty) for kind, array, certainty in raw]


def strict_verdict(reports: list[BugReport], fingerprint: Fingerprint | None) -> str:
    if not reports:
        return BUG_FREE
    if len(reports) == 1 and fingerprint is not None and fingerprint.matches(reports[0]):
        return SAME_BUG
    return DIVERGENT


def _access_positions(ast: Ast, array: str) -> set[int]:
    """Original positions of the array-name token of every access to `array`."""
    positions: set[int] = set()

    def walk_expr(expr):
        if isinstance(expr, Index):
            if expr.name == array:
                positions.add(expr.lo)
            walk_expr(expr.expr)
        elif hasattr(expr, "left"):
            walk_expr(expr.left)
            walk_expr(expr.right)

    def walk_stmts(stmts):
        for stmt in stmts:
            if isinstance(stmt, Assign):
                walk_expr(stmt.target)
                if stmt.value is not None:
                    walk_expr(stmt.value)
            elif isinstance(stmt, If):
                walk_expr(stmt.cond.left)
                walk_expr(stmt.cond.right)
                walk_stmts(stmt.then)
                if stmt.orelse is not None:
                    walk_stmts(stmt.orelse)
            elif isinstance(stmt, For):
                walk_stmts([stmt.init, stmt.step])
                walk_expr(stmt.cond.left)
                walk_expr(stmt.cond.right)
                walk_stmts(stmt.body)
            elif isinstance(stmt, While):
                walk_expr(stmt.cond.left)
                walk_expr(stmt.cond.right)
                walk_stmts(stmt.body)
            else:
                init = getattr(stmt, "init", None)
                if init is not None:
                    walk_expr(init)
                expr = getattr(stmt, "expr", None)
                if expr is not None:
                    walk_expr(expr)
                for arg in getattr(stmt, "args", ()):
                    walk_expr(arg)

    walk_stmts(ast.body)
    return positions


def _check_provenance(program_tokens: list[Token], original_tokens: list[Token]) -> None:
    last = -1
    for t in program_tokens:
        if t.index <= last or t.index >= len(original_tokens):
            raise DataError("lenient matching requires tokens carrying original positions")
        if original_tokens[t.index].text != t.text:
            raise DataError("program tokens do not originate from original_tokens")
        last = t.index


def buggy_access_survives(
    program_tokens: list[Token],
    fingerprint: Fingerprint,
    original_tokens: list[Token],
) -> bool:
    """True when an original access to the fingerprinted array survived.

    Program tokens must be a subsequence of ``original_tokens`` with
    their ``index`` fields pointing at original positions, which holds
    for every reduction candidate and for the samples themselves.
    """
    _check_provenance(program_tokens, original_tokens)
    original_ast = lang.parse(original_tokens)
    anchors = _access_positions(original_ast, fingerprint.array)
    return any(t.index in anchors for t in program_tokens)


def label_parsed(
    ast: Ast,
    program_tokens: list[Token],
    fingerprint: Fingerprint | None,
    mode: str = "strict",
    original_tokens: list[Token] | None = None,
) -> str:
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown match mode {mode!r}")
    verdict = strict_verdict(analyze(ast), fingerprint)
    if mode == "strict" or verdict == SAME_BUG or fingerprint is None:
        return verdict
    if original_tokens is None:
        raise ValueError("lenient mode requires original_tokens")
    if buggy_access_survives(program_tokens, fingerprint, original_tokens):
        return SAME_BUG
    return verdict


def label(
    program_tokens: list[Token],
    fingerprint: Fingerprint | None,
    mode: str = "strict",
    original_tokens: list[Token] | None = None,
) -> str:
    """Classify a verified program against the original bug.

    Returns ``same_bug`` when the analyzer finds exactly the original
    bug (a possible finding counts as present), ``bug_free`` when it
    finds nothing, ``divergent`` otherwise.  Lenient mode additionally
    counts a surviving original buggy access as ``same_bug``, so a
    strict ``same_bug`` is always a lenient one.
    """
    ast = lang.parse(program_tokens)
    return label_parsed(ast, program_tokens, fingerprint, mode, original_tokens)
