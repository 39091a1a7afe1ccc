"""Interval abstract interpretation for the mini language.

Scalars are tracked as integer intervals: literals are exact,
uninitialized variables are the full range, if/else merges by interval
hull, and loops whose condition stays decidable are unrolled exactly up
to a fixed iteration cap, beyond which (or when a condition is
undecidable) every variable assigned in the loop is widened to the full
range and the body is traversed once more to keep collecting accesses.

Each array access is classified against [0, size): fully inside yields
no finding, fully outside a definite one, anything else a possible one.
Array element values are not tracked; reads of elements are full range.

Compiled with Cython when available; semantics are identical either way.
"""

from sigaware.astnodes import (
    ArrayDecl,
    Assign,
    CallStmt,
    Decl,
    ExprStmt,
    For,
    If,
    Index,
    Num,
    Var,
    While,
)
from sigaware.errors import AnalysisBudgetExceeded

NEG_INF = float("-inf")
POS_INF = float("inf")
TOP = (NEG_INF, POS_INF)

DEFAULT_MAX_UNROLL = 256
DEFAULT_STEP_BUDGET = 10**6

_KIND = "buffer_overflow"


def _mul(a, b):
    if a == 0 or b == 0:
        return 0
    return a * b


def _interval_binop(op, a, b):
    if op == "+":
        return (a[0] + b[0], a[1] + b[1])
    if op == "-":
        return (a[0] - b[1], a[1] - b[0])
    products = (_mul(a[0], b[0]), _mul(a[0], b[1]), _mul(a[1], b[0]), _mul(a[1], b[1]))
    return (min(products), max(products))


def _hull(a, b):
    return (min(a[0], b[0]), max(a[1], b[1]))


def _decide(op, a, b):
    """Three-valued comparison of two intervals: True, False or None."""
    alo, ahi = a
    blo, bhi = b
    if op == "<":
        if ahi < blo:
            return True
        if alo >= bhi:
            return False
        return None
    if op == "<=":
        if ahi <= blo:
            return True
        if alo > bhi:
            return False
        return None
    if op == ">":
        return _decide("<", b, a)
    if op == ">=":
        return _decide("<=", b, a)
    if op == "==":
        if alo == ahi == blo == bhi:
            return True
        if ahi < blo or bhi < alo:
            return False
        return None
    # !=
    eq = _decide("==", a, b)
    if eq is None:
        return None
    return not eq


def _assigned_names(stmts, acc):
    for stmt in stmts:
        if isinstance(stmt, (Decl, ArrayDecl)):
            acc.add(stmt.name)
        elif isinstance(stmt, Assign):
            if isinstance(stmt.target, Var):
                acc.add(stmt.target.name)
        elif isinstance(stmt, If):
            _assigned_names(stmt.then, acc)
            if stmt.orelse is not None:
                _assigned_names(stmt.orelse, acc)
        elif isinstance(stmt, For):
            _assigned_names([stmt.init, stmt.step], acc)
            _assigned_names(stmt.body, acc)
        elif isinstance(stmt, While):
            _assigned_names(stmt.body, acc)
    return acc


class _Interp:
    def __init__(self, max_unroll, step_budget):
        self.env = {}
        self.sizes = {}
        self.findings = {}  # array name -> certainty, insertion ordered
        self.max_unroll = max_unroll
        self.step_budget = step_budget
        self.steps = 0

    def _tick(self):
        self.steps += 1
        if self.steps > self.step_budget:
            raise AnalysisBudgetExceeded(f"abstract interpretation exceeded {self.step_budget} steps")

    def _record(self, array, certainty):
        prev = self.findings.get(array)
        if prev is None or (prev == "possible" and certainty == "definite"):
            self.findings[array] = certainty

    def _check_access(self, name, idx):
        size = self.sizes.get(name)
        if size is None:
            return
        lo, hi = idx
        if lo >= 0 and hi <= size - 1:
            return
        if hi < 0 or lo > size - 1:
            self._record(name, "definite")
        else:
            self._record(name, "possible")

    def eval_expr(self, expr):
        if isinstance(expr, Num):
            return (expr.value, expr.value)
        if isinstance(expr, Var):
            return self.env.get(expr.name, TOP)
        if isinstance(expr, Index):
            self._check_access(expr.name, self.eval_expr(expr.expr))
            return TOP
        return _interval_binop(expr.op, self.eval_expr(expr.left), self.eval_expr(expr.right))

    def eval_cond(self, cond):
        return _decide(cond.op, self.eval_expr(cond.left), self.eval_expr(cond.right))

    def exec_stmts(self, stmts):
        for stmt in stmts:
            self.exec_stmt(stmt)

    def exec_stmt(self, stmt):
        self._tick()
        if isinstance(stmt, Decl):
            self.env[stmt.name] = TOP if stmt.init is None else self.eval_expr(stmt.init)
        elif isinstance(stmt, ArrayDecl):
            self.sizes[stmt.name] = stmt.size
        elif isinstance(stmt, Assign):
            value = TOP if stmt.value is None else self.eval_expr(stmt.value)
            if isinstance(stmt.target, Var):
                self.env[stmt.target.name] = value
            else:
                self._check_access(stmt.target.name, self.eval_expr(stmt.target.expr))
        elif isinstance(stmt, ExprStmt):
            self.eval_expr(stmt.expr)
        elif isinstance(stmt, CallStmt):
            for arg in stmt.args:
                self.eval_expr(arg)
        elif isinstance(stmt, If):
            self._exec_if(stmt)
        elif isinstance(stmt, For):
            self.exec_stmt(stmt.init)
            self._exec_loop(stmt.cond, stmt.body, stmt.step)
        elif isinstance(stmt, While):
            self._exec_loop(stmt.cond, stmt.body, None)

    def _exec_if(self, stmt):
        verdict = self.eval_cond(stmt.cond)
        if verdict is True:
            self.exec_stmts(stmt.then)
            return
        if verdict is False:
            if stmt.orelse is not None:
                self.exec_stmts(stmt.orelse)
            return
        base = dict(self.env)
        self.exec_stmts(stmt.then)
        then_env = self.env
        self.env = base
        if stmt.orelse is not None:
            self.exec_stmts(stmt.orelse)
        self._join_env(then_env)

    def _join_env(self, other):
        merged = {}
        for name in set(self.env) | set(other):
            a = self.env.get(name, TOP)
            b = other.get(name, TOP)
            merged[name] = _hull(a, b)
        self.env = merged

    def _exec_loop(self, cond, body, step):
        iterations = 0
        while True:
            verdict = self.eval_cond(cond)
            if verdict is False:
                return
            if verdict is None or iterations >= self.max_unroll:
                self._widen_loop(cond, body, step)
                return
            self.exec_stmts(body)
            if step is not None:
                self.exec_stmt(step)
            iterations += 1

    def _widen_loop(self, cond, body, step):
        assigned = _assigned_names(list(body) + ([step] if step is not None else []), set())
        for name in assigned:
            if name in self.sizes:
                continue
            self.env[name] = TOP
        self.eval_cond(cond)
        self.exec_stmts(body)
        if step is not None:
            self.exec_stmt(step)
        for name in assigned:
            if name in self.sizes:
                continue
            self.env[name] = TOP


def analyze_function(ast, max_unroll=DEFAULT_MAX_UNROLL, step_budget=DEFAULT_STEP_BUDGET):
    """Run the interpretation over a verified AST.

    Returns [(kind, array, certainty)] aggregated per array in order of
    first out-of-bounds access.  Parameters are unknown integers.
    """
    interp = _Interp(max_unroll, step_budget)
    for p in ast.params:
        interp.env[p] = TOP
    interp.exec_stmts(ast.body)
    return [(_KIND, array, certainty) for array, certainty in interp.findings.items()]
