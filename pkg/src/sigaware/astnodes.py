"""AST node types and validity reports for the mini language.

Every node records the half-open range ``[lo, hi)`` of positions it covers
in the token list it was parsed from.  Ranges are positions in that list,
not ``Token.index`` values, so subsequences parse cleanly.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(slots=True)
class Node:
    lo: int = field(default=0, kw_only=True)
    hi: int = field(default=0, kw_only=True)


@dataclass(slots=True)
class Num(Node):
    value: int


@dataclass(slots=True)
class Var(Node):
    name: str


@dataclass(slots=True)
class Index(Node):
    """Array element access ``name[expr]``."""

    name: str
    expr: "Expr"


@dataclass(slots=True)
class BinOp(Node):
    op: str  # + - *
    left: "Expr"
    right: "Expr"


Expr = Num | Var | Index | BinOp


@dataclass(slots=True)
class Cmp(Node):
    op: str  # < <= > >= == !=
    left: Expr
    right: Expr


@dataclass(slots=True)
class Decl(Node):
    name: str
    init: Expr | None


@dataclass(slots=True)
class ArrayDecl(Node):
    name: str
    size: int


@dataclass(slots=True)
class Assign(Node):
    """Assignment statement; a missing right-hand side leaves the target unknown."""

    target: Var | Index
    value: Expr | None


@dataclass(slots=True)
class ExprStmt(Node):
    expr: Expr


@dataclass(slots=True)
class Empty(Node):
    """Null statement, a bare semicolon."""


@dataclass(slots=True)
class CallStmt(Node):
    """Call-like no-op statement; the callee is not a declared name."""

    callee: str
    args: list[Expr]


@dataclass(slots=True)
class If(Node):
    cond: Cmp
    then: list["Stmt"]
    orelse: list["Stmt"] | None


@dataclass(slots=True)
class For(Node):
    init: Assign
    cond: Cmp
    step: Assign
    body: list["Stmt"]


@dataclass(slots=True)
class While(Node):
    cond: Cmp
    body: list["Stmt"]


Stmt = Decl | ArrayDecl | Assign | ExprStmt | Empty | CallStmt | If | For | While


@dataclass(slots=True)
class Function(Node):
    name: str
    params: list[str]
    body: list[Stmt]


Ast = Function


@dataclass(slots=True)
class Diagnostic:
    code: str
    token_range: tuple[int, int]
    message: str
    severity: str = "error"


@dataclass(slots=True)
class ValidityReport:
    valid: bool
    diagnostics: list[Diagnostic]

    def __post_init__(self):
        assert self.valid == all(d.severity != "error" for d in self.diagnostics)
