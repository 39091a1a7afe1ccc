"""Lexer, recursive-descent parser, validity checker and canonical renderer.

This module is the single source of truth for the language surface: one
function over ints and fixed-size int arrays, with +, -, *, comparisons,
if/else, for/while, array reads/writes and call-like no-op statements.
The grammar is documented as EBNF in docs/grammar.md.

Compiled with Cython when available; semantics are identical either way.
"""

from sigaware.astnodes import (
    ArrayDecl,
    Assign,
    BinOp,
    CallStmt,
    Cmp,
    Decl,
    Diagnostic,
    Empty,
    ExprStmt,
    For,
    Function,
    If,
    Index,
    Num,
    ValidityReport,
    Var,
    While,
)
from sigaware.errors import LexError, ParseError
from sigaware.tokens import (
    IDENTIFIER,
    INT_LITERAL,
    KEYWORD,
    KEYWORDS,
    OPERATOR,
    PUNCT,
    Token,
)

_PUNCT_CHARS = "(){}[];,"
_CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")


def tokenize(text):
    """Split source text into tokens, discarding whitespace and comments.

    Raises LexError on any character outside the language alphabet.
    """
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c in " \t\r\n":
            i += 1
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "/":
            j = text.find("\n", i)
            i = n if j < 0 else j + 1
            continue
        if c == "/" and i + 1 < n and text[i + 1] == "*":
            j = text.find("*/", i + 2)
            if j < 0:
                raise LexError(i, "/*")
            i = j + 2
            continue
        if c.isalpha() or c == "_":
            j = i + 1
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = KEYWORD if word in KEYWORDS else IDENTIFIER
            tokens.append(Token(kind, word, len(tokens)))
            i = j
            continue
        if c.isdigit():
            j = i + 1
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(Token(INT_LITERAL, text[i:j], len(tokens)))
            i = j
            continue
        if c in _PUNCT_CHARS:
            tokens.append(Token(PUNCT, c, len(tokens)))
            i += 1
            continue
        if c in "<>=!":
            if i + 1 < n and text[i + 1] == "=":
                tokens.append(Token(OPERATOR, c + "=", len(tokens)))
                i += 2
                continue
            if c == "!":
                raise LexError(i, c)
            tokens.append(Token(OPERATOR, c, len(tokens)))
            i += 1
            continue
        if c in "+-*":
            tokens.append(Token(OPERATOR, c, len(tokens)))
            i += 1
            continue
        raise LexError(i, c)
    return tokens


class _Parser:
    """Recursive-descent parser over a token list.

    Positions reported in errors and node spans refer to list positions of
    the sequence being parsed, so arbitrary subsequences can be tried.
    """

    def __init__(self, tokens):
        self.toks = tokens
        self.pos = 0

    def _fail(self, message):
        raise ParseError(min(self.pos, len(self.toks)), message)

    def _peek_text(self, ahead=0):
        p = self.pos + ahead
        if p < len(self.toks):
            return self.toks[p].text
        return None

    def _peek_kind(self, ahead=0):
        p = self.pos + ahead
        if p < len(self.toks):
            return self.toks[p].kind
        return None

    def _expect_text(self, text, what):
        if self._peek_text() != text:
            self._fail(f"expected {what!s} {text!r}")
        self.pos += 1

    def _expect_ident(self, what):
        if self._peek_kind() != IDENTIFIER:
            self._fail(f"expected {what}")
        tok = self.toks[self.pos]
        self.pos += 1
        return tok.text

    def parse_program(self):
        lo = self.pos
        self._expect_text("void", "keyword")
        name = self._expect_ident("function name")
        self._expect_text("(", "punct")
        params = []
        if self._peek_text() != ")":
            while True:
                self._expect_text("int", "parameter type")
                params.append(self._expect_ident("parameter name"))
                if self._peek_text() == ",":
                    self.pos += 1
                    continue
                break
        self._expect_text(")", "punct")
        body = self.parse_block()
        if self.pos != len(self.toks):
            self._fail("trailing tokens after function body")
        return Function(name, params, body, lo=lo, hi=self.pos)

    def parse_block(self):
        self._expect_text("{", "block open")
        stmts = []
        while True:
            t = self._peek_text()
            if t is None:
                self._fail("unterminated block")
            if t == "}":
                self.pos += 1
                return stmts
            stmts.append(self.parse_stmt())

    def parse_stmt(self):
        lo = self.pos
        kind = self._peek_kind()
        text = self._peek_text()
        if text == ";":
            self.pos += 1
            return Empty(lo=lo, hi=self.pos)
        if text == "int":
            return self._parse_decl(lo)
        if text == "if":
            return self._parse_if(lo)
        if text == "for":
            return self._parse_for(lo)
        if text == "while":
            return self._parse_while(lo)
        if kind == IDENTIFIER and self._peek_text(1) == "(":
            return self._parse_call(lo)
        # assignment or expression statement
        expr = self.parse_expr()
        if self._peek_text() == "=":
            if not isinstance(expr, (Var, Index)):
                self._fail("assignment target must be a variable or array element")
            self.pos += 1
            value = None
            if self._peek_text() != ";":
                value = self.parse_expr()
            self._expect_text(";", "statement end")
            return Assign(expr, value, lo=lo, hi=self.pos)
        self._expect_text(";", "statement end")
        return ExprStmt(expr, lo=lo, hi=self.pos)

    def _parse_decl(self, lo):
        self.pos += 1  # int
        name = self._expect_ident("declared name")
        if self._peek_text() == "[":
            self.pos += 1
            if self._peek_kind() != INT_LITERAL:
                self._fail("array size must be an integer literal")
            size = int(self.toks[self.pos].text)
            if size <= 0:
                self._fail("array size must be positive")
            self.pos += 1
            self._expect_text("]", "array size close")
            self._expect_text(";", "statement end")
            return ArrayDecl(name, size, lo=lo, hi=self.pos)
        init = None
        if self._peek_text() == "=":
            self.pos += 1
            init = self.parse_expr()
        self._expect_text(";", "statement end")
        return Decl(name, init, lo=lo, hi=self.pos)

    def _parse_call(self, lo):
        callee = self._expect_ident("callee")
        self._expect_text("(", "call open")
        args = []
        if self._peek_text() != ")":
            while True:
                args.append(self.parse_expr())
                if self._peek_text() == ",":
                    self.pos += 1
                    continue
                break
        self._expect_text(")", "call close")
        self._expect_text(";", "statement end")
        return CallStmt(callee, args, lo=lo, hi=self.pos)

    def _parse_if(self, lo):
        self.pos += 1
        self._expect_text("(", "condition open")
        cond = self.parse_cond()
        self._expect_text(")", "condition close")
        then = self.parse_block()
        orelse = None
        if self._peek_text() == "else":
            self.pos += 1
            orelse = self.parse_block()
        return If(cond, then, orelse, lo=lo, hi=self.pos)

    def _parse_for(self, lo):
        self.pos += 1
        self._expect_text("(", "for header open")
        init = self._parse_header_assign()
        self._expect_text(";", "for header")
        cond = self.parse_cond()
        self._expect_text(";", "for header")
        step = self._parse_header_assign()
        self._expect_text(")", "for header close")
        body = self.parse_block()
        return For(init, cond, step, body, lo=lo, hi=self.pos)

    def _parse_header_assign(self):
        lo = self.pos
        target = self.parse_expr()
        if not isinstance(target, (Var, Index)):
            self._fail("loop header assignment target must be a variable or array element")
        self._expect_text("=", "loop header assignment")
        value = self.parse_expr()
        return Assign(target, value, lo=lo, hi=self.pos)

    def _parse_while(self, lo):
        self.pos += 1
        self._expect_text("(", "condition open")
        cond = self.parse_cond()
        self._expect_text(")", "condition close")
        body = self.parse_block()
        return While(cond, body, lo=lo, hi=self.pos)

    def parse_cond(self):
        lo = self.pos
        left = self.parse_expr()
        op = self._peek_text()
        if op not in _CMP_OPS:
            self._fail("expected comparison operator")
        self.pos += 1
        right = self.parse_expr()
        return Cmp(op, left, right, lo=lo, hi=self.pos)

    def parse_expr(self):
        lo = self.pos
        node = self.parse_term()
        while self._peek_text() in ("+", "-"):
            op = self._peek_text()
            self.pos += 1
            rhs = self.parse_term()
            node = BinOp(op, node, rhs, lo=lo, hi=self.pos)
        return node

    def parse_term(self):
        lo = self.pos
        node = self.parse_factor()
        while self._peek_text() == "*":
            self.pos += 1
            rhs = self.parse_factor()
            node = BinOp("*", node, rhs, lo=lo, hi=self.pos)
        return node

    def parse_factor(self):
        lo = self.pos
        kind = self._peek_kind()
        if kind == INT_LITERAL:
            value = int(self.toks[self.pos].text)
            self.pos += 1
            return Num(value, lo=lo, hi=self.pos)
        if kind == IDENTIFIER:
            name = self.toks[self.pos].text
            self.pos += 1
            if self._peek_text() == "[":
                self.pos += 1
                expr = self.parse_expr()
                self._expect_text("]", "index close")
                return Index(name, expr, lo=lo, hi=self.pos)
            return Var(name, lo=lo, hi=self.pos)
        if self._peek_text() == "(":
            self.pos += 1
            node = self.parse_expr()
            self._expect_text(")", "paren close")
            return node
        self._fail("expected expression")


def parse(tokens):
    """Parse a token list into a Function AST or raise ParseError."""
    return _Parser(tokens).parse_program()


_SCALAR = 0
_ARRAY = 1


def _check_expr(expr, symbols, diags):
    if isinstance(expr, Num):
        return
    if isinstance(expr, Var):
        entry = symbols.get(expr.name)
        if entry is None:
            diags.append(
                Diagnostic("undeclared", (expr.lo, expr.hi), f"use of undeclared name {expr.name!r}")
            )
        elif entry[0] == _ARRAY:
            diags.append(
                Diagnostic("array-as-scalar", (expr.lo, expr.hi), f"array {expr.name!r} used as a value")
            )
        return
    if isinstance(expr, Index):
        entry = symbols.get(expr.name)
        if entry is None:
            diags.append(
                Diagnostic("undeclared", (expr.lo, expr.hi), f"index into undeclared name {expr.name!r}")
            )
        elif entry[0] != _ARRAY:
            diags.append(
                Diagnostic("not-an-array", (expr.lo, expr.hi), f"{expr.name!r} is not an array")
            )
        _check_expr(expr.expr, symbols, diags)
        return
    # BinOp
    _check_expr(expr.left, symbols, diags)
    _check_expr(expr.right, symbols, diags)


def _check_stmts(stmts, symbols, diags):
    for stmt in stmts:
        if isinstance(stmt, Decl):
            if stmt.init is not None:
                _check_expr(stmt.init, symbols, diags)
            if stmt.name in symbols:
                diags.append(
                    Diagnostic("redeclared", (stmt.lo, stmt.hi), f"{stmt.name!r} redeclared")
                )
            else:
                symbols[stmt.name] = (_SCALAR, 0)
        elif isinstance(stmt, ArrayDecl):
            if stmt.name in symbols:
                diags.append(
                    Diagnostic("redeclared", (stmt.lo, stmt.hi), f"{stmt.name!r} redeclared")
                )
            else:
                symbols[stmt.name] = (_ARRAY, stmt.size)
        elif isinstance(stmt, Assign):
            _check_expr(stmt.target, symbols, diags)
            if stmt.value is not None:
                _check_expr(stmt.value, symbols, diags)
        elif isinstance(stmt, ExprStmt):
            _check_expr(stmt.expr, symbols, diags)
        elif isinstance(stmt, CallStmt):
            # callee names are extern-like and exempt from declaration checks
            for arg in stmt.args:
                _check_expr(arg, symbols, diags)
        elif isinstance(stmt, If):
            _check_expr(stmt.cond.left, symbols, diags)
            _check_expr(stmt.cond.right, symbols, diags)
            _check_stmts(stmt.then, symbols, diags)
            if stmt.orelse is not None:
                _check_stmts(stmt.orelse, symbols, diags)
        elif isinstance(stmt, For):
            _check_stmts([stmt.init], symbols, diags)
            _check_expr(stmt.cond.left, symbols, diags)
            _check_expr(stmt.cond.right, symbols, diags)
            _check_stmts([stmt.step], symbols, diags)
            _check_stmts(stmt.body, symbols, diags)
        elif isinstance(stmt, While):
            _check_expr(stmt.cond.left, symbols, diags)
            _check_expr(stmt.cond.right, symbols, diags)
            _check_stmts(stmt.body, symbols, diags)


def check_program(tokens):
    """Parse plus name/type checking.

    Returns (report, ast); ast is None when the report is invalid.
    Declarations live in a single function-level scope and must precede
    use in statement order.  Uninitialized reads are allowed: the check
    models compilability, not definite assignment.
    """
    try:
        ast = parse(tokens)
    except ParseError as exc:
        diag = Diagnostic("parse-error", (exc.token_index, exc.token_index + 1), str(exc))
        return ValidityReport(False, [diag]), None
    diags = []
    symbols = {}
    for p in ast.params:
        if p in symbols:
            diags.append(Diagnostic("redeclared", (ast.lo, ast.hi), f"parameter {p!r} redeclared"))
        symbols[p] = (_SCALAR, 0)
    _check_stmts(ast.body, symbols, diags)
    ok = all(d.severity != "error" for d in diags)
    return ValidityReport(ok, diags), (ast if ok else None)


def verify(tokens):
    """Validity check: parses and name/type checks; never raises."""
    report, _ast = check_program(tokens)
    return report


_NO_SPACE_BEFORE = frozenset({")", "]", ",", ";", "["})
_NO_SPACE_AFTER = frozenset({"(", "["})
_PAREN_KEYWORDS = frozenset({"if", "while", "for"})


def _needs_space(prev, cur):
    if prev is None:
        return False
    if prev.text in _NO_SPACE_AFTER:
        return False
    if cur.text in _NO_SPACE_BEFORE:
        return False
    if cur.text == "(":
        if prev.kind == IDENTIFIER:
            return False
        if prev.kind == KEYWORD:
            return prev.text in _PAREN_KEYWORDS
        if prev.text in ("(", ")"):
            return False
        return True
    return True


def render(tokens):
    """Canonical source text for a token sequence.

    One statement per line, four-space indentation, fixed operator
    spacing; ``}`` joins a following ``else`` on one line.  Retokenizing
    the output reproduces the input kind/text sequence for any token list,
    grammatical or not (line breaking tracks brace and paren depth only).
    """
    lines = []
    line_parts = []
    indent = 0
    paren_depth = 0
    prev = None

    def flush():
        nonlocal prev
        if line_parts:
            lines.append("".join(line_parts))
            line_parts.clear()
        prev = None

    count = len(tokens)
    for i in range(count):
        tok = tokens[i]
        text = tok.text
        if text == "}":
            flush()
            if indent > 0:
                indent -= 1
            line_parts.append("    " * indent + "}")
            prev = tok
            if i + 1 < count and tokens[i + 1].text == "else":
                continue
            flush()
            continue
        if not line_parts:
            line_parts.append("    " * indent)
        elif _needs_space(prev, tok):
            line_parts.append(" ")
        line_parts.append(text)
        prev = tok
        if text == "(":
            paren_depth += 1
        elif text == ")":
            paren_depth = max(0, paren_depth - 1)
        elif text == "{":
            flush()
            indent += 1
        elif text == ";" and paren_depth == 0:
            flush()
    flush()
    return "\n".join(lines)
