"""Complexity metrics and complexity-ranked orderings.

sloc counts non-empty lines of the canonical rendering, so the same
program measures the same regardless of how its source was formatted.
Halstead classification is fixed: keywords, operators and punctuation
count as operators; identifiers and literals count as operands.
Cyclomatic complexity is 1 + the number of if/for/while statements,
the classic definition restricted to this grammar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

from sigaware import lang
from sigaware.astnodes import Ast, For, If, While
from sigaware.errors import UnknownMetric
from sigaware.tokens import IDENTIFIER, INT_LITERAL, Token

if TYPE_CHECKING:
    from sigaware.samples import Sample

METRIC_NAMES = ("sloc", "ifs", "loops", "cyclomatic", "volume", "difficulty", "effort")


@dataclass(frozen=True, slots=True)
class ComplexityVector:
    sloc: int
    ifs: int
    loops: int
    cyclomatic: int
    volume: float
    difficulty: float
    effort: float

    def get(self, name: str) -> float:
        if name not in METRIC_NAMES:
            raise UnknownMetric(f"unknown metric {name!r}; expected one of {METRIC_NAMES}")
        return getattr(self, name)

    def to_json(self) -> dict:
        return {name: getattr(self, name) for name in METRIC_NAMES}

    @classmethod
    def from_json(cls, obj: dict) -> "ComplexityVector":
        return cls(
            sloc=int(obj["sloc"]),
            ifs=int(obj["ifs"]),
            loops=int(obj["loops"]),
            cyclomatic=int(obj["cyclomatic"]),
            volume=float(obj["volume"]),
            difficulty=float(obj["difficulty"]),
            effort=float(obj["effort"]),
        )


def halstead_counts(tokens: Iterable[Token]) -> tuple[int, int, int, int]:
    """(n1, n2, N1, N2): distinct/total operators and operands."""
    ops: set[str] = set()
    opr: set[str] = set()
    total_ops = 0
    total_opr = 0
    for t in tokens:
        if t.kind in (IDENTIFIER, INT_LITERAL):
            total_opr += 1
            opr.add(t.text)
        else:
            total_ops += 1
            ops.add(t.text)
    return len(ops), len(opr), total_ops, total_opr


def halstead(tokens: Iterable[Token]) -> tuple[float, float, float]:
    """(volume, difficulty, effort) from the standard formulas."""
    n1, n2, total_ops, total_opr = halstead_counts(tokens)
    vocabulary = n1 + n2
    length = total_ops + total_opr
    volume = length * math.log2(vocabulary) if vocabulary > 0 else 0.0
    difficulty = (n1 / 2.0) * (total_opr / n2) if n2 > 0 else 0.0
    return volume, difficulty, difficulty * volume


def _count_branches(stmts) -> tuple[int, int]:
    ifs = 0
    loops = 0
    for stmt in stmts:
        if isinstance(stmt, If):
            ifs += 1
            a, b = _count_branches(stmt.then)
            ifs += a
            loops += b
            if stmt.orelse is not None:
                a, b = _count_branches(stmt.orelse)
                ifs += a
                loops += b
        elif isinstance(stmt, For):
            loops += 1
            a, b = _count_branches(stmt.body)
            ifs += a
            loops += b
        elif isinstance(stmt, While):
            loops += 1
            a, b = _count_branches(stmt.body)
            ifs += a
            loops += b
    return ifs, loops


def measure(ast: Ast, tokens: list[Token]) -> ComplexityVector:
    """Complexity vector of a verified program.

    Invariant under bijective identifier renaming: renaming preserves
    line structure, branch counts and distinct operand counts.
    """
    ifs, loops = _count_branches(ast.body)
    rendered = lang.render(tokens)
    sloc = sum(1 for line in rendered.splitlines() if line.strip())
    volume, difficulty, effort = halstead(tokens)
    return ComplexityVector(
        sloc=sloc,
        ifs=ifs,
        loops=loops,
        cyclomatic=1 + ifs + loops,
        volume=volume,
        difficulty=difficulty,
        effort=effort,
    )


def rank(samples: "Iterable[Sample]", key: str) -> list[str]:
    """Sample ids in nondecreasing order of a metric, ties by ascending id."""
    if key not in METRIC_NAMES:
        raise UnknownMetric(f"unknown metric {key!r}; expected one of {METRIC_NAMES}")
    decorated = sorted((s.metrics.get(key), s.id) for s in samples)
    return [sid for _score, sid in decorated]
