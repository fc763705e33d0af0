"""A small expression language over chart coordinates.

Grammar (lowest to highest precedence, all binary operators left
associative)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' intexp)*
    intexp  := ['-'] INT | '(' ['-'] INT ')'         integer in [-6, 6]
    atom    := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

``FUNC`` is one of sin, cos, exp, sqrt.  ``pi`` is a constant unless it is
declared as a coordinate.  Expressions compile to a register tape that the
jet kernel evaluates at many points at once.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _opcodes as ops
from .backend import kernel
from .jets import Jet3, JetDomainError, cos, exp, layout, seed, sin, sqrt

FUNCTIONS = ("sin", "cos", "exp", "sqrt")
MAX_EXPONENT = 6
MAX_DEPTH = 100
MAX_HEIGHT = 250


class ExprError(ValueError):
    """Lexing, parsing, binding or evaluation failure with a source span."""

    def __init__(self, kind, span, message, source=None):
        super().__init__(f"{kind} error at {span[0]}:{span[1]}: {message}")
        self.kind = kind
        self.span = span
        self.message = message
        self.source = source

    def caret(self):
        """Source line with the span underlined, for terminal output."""
        if self.source is None:
            return ""
        a, b = self.span
        return f"{self.source}\n{' ' * a}{'^' * max(1, b - a)}"


# --- tree -----------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: float
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Var:
    name: str
    index: int
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Unary:
    op: str  # neg, sin, cos, exp, sqrt
    arg: "Expr"
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Binary:
    op: str  # + - * /
    left: "Expr"
    right: "Expr"
    span: tuple = field(default=(0, 0), compare=False)


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int
    span: tuple = field(default=(0, 0), compare=False)


Expr = Const | Var | Unary | Binary | Pow


# --- lexer ----------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    start: int
    end: int


def tokenize(source: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ExprError("lex", (pos, pos + 1),
                            f"illegal character {source[pos]!r}", source)
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), m.start(), m.end()))
        pos = m.end()
    toks.append(_Tok("eof", "", len(source), len(source)))
    return toks


# --- parser ---------------------------------------------------------------

class _Parser:
    def __init__(self, source, declared):
        self.source = source
        self.declared = {name: i for i, name in enumerate(declared)}
        self.toks = tokenize(source)
        self.i = 0
        self.depth = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def error(self, span, message, kind="parse"):
        end = len(self.source)
        a = min(span[0], end)
        return ExprError(kind, (a, min(max(span[1], a), end)), message, self.source)

    def expect(self, text, opened=None):
        tok = self.peek()
        if tok.text != text or tok.kind != "op":
            if opened is not None:
                raise self.error((opened, tok.end if tok.kind != "eof" else tok.start),
                                 f"expected {text!r} to close the group opened here")
            raise self.error((tok.start, max(tok.end, tok.start + 1)),
                             f"expected {text!r}, found {tok.text or 'end of input'!r}")
        return self.take()

    def nest(self, start):
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise self.error((start, start + 1), "expression nested too deeply")

    def parse(self):
        if not self.source.strip():
            raise self.error((0, len(self.source)), "empty expression")
        node = self.expr()
        tok = self.peek()
        if tok.kind != "eof":
            raise self.error((tok.start, tok.end), f"unexpected {tok.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            rhs = self.term()
            node = Binary(op, node, rhs, (node.span[0], rhs.span[1]))
        return node

    def term(self):
        node = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            rhs = self.unary()
            node = Binary(op, node, rhs, (node.span[0], rhs.span[1]))
        return node

    def unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.take()
            self.nest(tok.start)
            arg = self.unary()
            self.depth -= 1
            span = (tok.start, arg.span[1])
            if isinstance(arg, Const) and arg.value >= 0 and self._bare_literal(arg):
                return Const(-arg.value, span)
            return Unary("neg", arg, span)
        return self.power()

    def _bare_literal(self, node):
        # "-2" folds to a constant but "-(2)" and "-2^2" do not.
        text = self.source[node.span[0]:node.span[1]]
        return _TOKEN.fullmatch(text) is not None and text[0] not in "("

    def power(self):
        node = self.atom()
        while self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            p, end = self.intexp()
            node = Pow(node, p, (node.span[0], end))
        return node

    def intexp(self):
        tok = self.peek()
        paren = tok.kind == "op" and tok.text == "("
        if paren:
            self.take()
        sign = 1
        start = self.peek().start
        if self.peek().kind == "op" and self.peek().text == "-":
            self.take()
            sign = -1
        num = self.peek()
        if num.kind != "num" or not num.text.isdigit() or len(num.text) > 3:
            raise self.error((start, max(num.end, start + 1)),
                             "exponent must be an integer literal")
        self.take()
        value = sign * int(num.text)
        if abs(value) > MAX_EXPONENT:
            raise self.error((start, num.end),
                             f"exponent {value} outside [-{MAX_EXPONENT}, {MAX_EXPONENT}]")
        end = num.end
        if paren:
            end = self.expect(")", opened=tok.start).end
        return value, end

    def atom(self):
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            value = float(tok.text)
            if not math.isfinite(value):
                raise self.error((tok.start, tok.end), "numeric literal overflows")
            return Const(value, (tok.start, tok.end))
        if tok.kind == "name":
            self.take()
            nxt = self.peek()
            if tok.text in FUNCTIONS and nxt.kind == "op" and nxt.text == "(":
                self.take()
                self.nest(tok.start)
                if self.peek().kind == "eof":
                    raise self.error((tok.start, self.peek().start),
                                     f"unclosed call to {tok.text}")
                arg = self.expr()
                close = self.expect(")", opened=tok.start)
                self.depth -= 1
                return Unary(tok.text, arg, (tok.start, close.end))
            if tok.text in FUNCTIONS:
                raise self.error((tok.start, tok.end),
                                 f"function {tok.text} needs a parenthesized argument")
            if tok.text in self.declared:
                return Var(tok.text, self.declared[tok.text], (tok.start, tok.end))
            if tok.text == "pi":
                return Const(math.pi, (tok.start, tok.end))
            raise self.error((tok.start, tok.end),
                             f"unbound variable {tok.text!r}", kind="unbound-variable")
        if tok.kind == "op" and tok.text == "(":
            self.take()
            self.nest(tok.start)
            inner = self.expr()
            close = self.expect(")", opened=tok.start)
            self.depth -= 1
            return _respan(inner, (tok.start, close.end))
        if tok.kind == "eof":
            raise self.error((tok.start, tok.start), "unexpected end of input")
        raise self.error((tok.start, tok.end), f"unexpected {tok.text!r}")


def _respan(node, span):
    # parentheses widen the span; structure is unchanged
    return type(node)(*[getattr(node, f) for f in node.__dataclass_fields__ if f != "span"],
                      span=span)


def parse(source: str, declared_vars: Sequence[str]) -> Expr:
    """Parse ``source`` with the given coordinate names in scope.

    Raises :class:`ExprError` (kind ``lex``, ``parse`` or
    ``unbound-variable``) on bad input.
    """
    for name in declared_vars:
        if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name) or name in FUNCTIONS:
            raise ValueError(f"invalid coordinate name {name!r}")
    if len(set(declared_vars)) != len(declared_vars):
        raise ValueError(f"duplicate coordinate names in {list(declared_vars)}")
    try:
        tree = _Parser(source, list(declared_vars)).parse()
    except RecursionError:
        # the nesting limit normally fires first; this guards deep call stacks
        raise ExprError("parse", (0, len(source)), "expression nested too deeply",
                        source) from None
    if height(tree) > MAX_HEIGHT:
        raise ExprError("parse", (0, len(source)),
                        f"expression tree deeper than {MAX_HEIGHT}", source)
    return tree


def _children(node):
    if isinstance(node, Unary):
        return (node.arg,)
    if isinstance(node, Pow):
        return (node.base,)
    if isinstance(node, Binary):
        return (node.left, node.right)
    return ()


def height(node: Expr) -> int:
    """Tree height, computed without recursion."""
    best = 0
    stack = [(node, 1)]
    while stack:
        cur, h = stack.pop()
        best = max(best, h)
        stack.extend((c, h + 1) for c in _children(cur))
    return best


_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _prec(node):
    if isinstance(node, Binary):
        return _PREC[node.op]
    if isinstance(node, Unary) and node.op == "neg":
        return 3
    if isinstance(node, Const) and (node.value < 0 or math.copysign(1.0, node.value) < 0):
        return 3
    if isinstance(node, Pow):
        return 4
    return 5


def unparse(node: Expr) -> str:
    """Render a tree back to source; ``parse(unparse(e))`` equals ``e``."""
    if isinstance(node, Const):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = unparse(node.arg)
            # keep "-(2.0)" from folding into a constant
            if _prec(node.arg) < 4 or isinstance(node.arg, Const):
                inner = f"({inner})"
            return f"-{inner}"
        return f"{node.op}({unparse(node.arg)})"
    if isinstance(node, Pow):
        base = unparse(node.base)
        if _prec(node.base) < 5:
            base = f"({base})"
        exp_txt = str(node.exponent) if node.exponent >= 0 else f"({node.exponent})"
        return f"{base}^{exp_txt}"
    if isinstance(node, Binary):
        p = _PREC[node.op]
        left = unparse(node.left)
        if _prec(node.left) < p:
            left = f"({left})"
        right = unparse(node.right)
        # left associativity: an equal-precedence right operand needs parens
        if _prec(node.right) <= p:
            right = f"({right})"
        return f"{left} {node.op} {right}"
    raise TypeError(f"not an expression node: {node!r}")


def variables(node: Expr) -> set:
    if isinstance(node, Var):
        return {node.index}
    if isinstance(node, Const):
        return set()
    if isinstance(node, Unary):
        return variables(node.arg)
    if isinstance(node, Pow):
        return variables(node.base)
    return variables(node.left) | variables(node.right)


# --- evaluation -----------------------------------------------------------

_BINOPS = {"+": ops.OP_ADD, "-": ops.OP_SUB, "*": ops.OP_MUL, "/": ops.OP_DIV}
_UNOPS = {"neg": ops.OP_NEG, "sin": ops.OP_SIN, "cos": ops.OP_COS,
          "exp": ops.OP_EXP, "sqrt": ops.OP_SQRT}


class Tape:
    """Several expressions compiled into one register program.

    Structurally equal subtrees share a register.
    """

    def __init__(self, exprs: Sequence[Expr], nvars: int, sources=None):
        self.nvars = nvars
        self.sources = list(sources) if sources is not None else [None] * len(exprs)
        self._code = []
        self._consts = []
        self._spans = []
        self._owner = []
        self._memo = {}
        self.outputs = np.array([self._emit(e, k) for k, e in enumerate(exprs)], dtype=np.intp)
        self.code = np.array(self._code, dtype=np.int_).reshape(-1, 3)
        self.consts = np.array(self._consts, dtype=float)
        self.layout = layout(nvars)
        del self._memo

    def _push(self, instr, node, owner):
        self._code.append(instr)
        self._spans.append(node.span)
        self._owner.append(owner)
        return len(self._code) - 1

    def _emit(self, node, owner):
        if node in self._memo:
            return self._memo[node]
        if isinstance(node, Const):
            self._consts.append(float(node.value))
            reg = self._push((ops.OP_CONST, len(self._consts) - 1, 0), node, owner)
        elif isinstance(node, Var):
            if not 0 <= node.index < self.nvars:
                raise ExprError("unbound-variable", node.span,
                                f"variable {node.name!r} has no coordinate slot")
            reg = self._push((ops.OP_VAR, node.index, 0), node, owner)
        elif isinstance(node, Unary):
            a = self._emit(node.arg, owner)
            reg = self._push((_UNOPS[node.op], a, 0), node, owner)
        elif isinstance(node, Pow):
            a = self._emit(node.base, owner)
            reg = self._push((ops.OP_POW, a, node.exponent), node, owner)
        elif isinstance(node, Binary):
            a = self._emit(node.left, owner)
            b = self._emit(node.right, owner)
            reg = self._push((_BINOPS[node.op], a, b), node, owner)
        else:
            raise TypeError(f"not an expression node: {node!r}")
        self._memo[node] = reg
        return reg

    def __len__(self):
        return len(self.code)

    def evaluate(self, points, kern=None) -> np.ndarray:
        """Jets of every output at every point: array ``(B, nout, width)``."""
        kern = kernel if kern is None else kern
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.nvars:
            raise ValueError(f"points have {pts.shape[1]} coordinates, expected {self.nvars}")
        lay = self.layout
        try:
            regs = kern.eval_tape(self.code, self.consts, pts, lay.pairs, lay.triples, lay.n)
        except ops.KernelDomainError as err:
            owner = self._owner[err.instr]
            point = tuple(float(c) for c in pts[err.point])
            raise ExprError("domain", self._spans[err.instr],
                            f"{err.reason} at point {point}", self.sources[owner]) from None
        return regs[:, self.outputs, :]

    def values(self, points, kern=None) -> np.ndarray:
        return self.evaluate(points, kern)[..., 0]


def eval_jet(expr: Expr, point) -> Jet3:
    """Jet of ``expr`` at one coordinate point, via the compiled tape."""
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    out = Tape([expr], len(pt)).evaluate(pt[None])
    return Jet3(out[0, 0], len(pt), tuple(pt))


def eval_jet_tree(expr: Expr, point) -> Jet3:
    """Same result as :func:`eval_jet` by recursive :class:`Jet3` arithmetic."""
    pt = np.atleast_1d(np.asarray(point, dtype=float))
    xs = [seed(pt, i) for i in range(len(pt))]

    def go(node):
        if isinstance(node, Const):
            return Jet3.constant(node.value, len(pt), xs[0].point)
        if isinstance(node, Var):
            return xs[node.index]
        if isinstance(node, Unary):
            a = go(node.arg)
            return {"neg": lambda u: -u, "sin": sin, "cos": cos,
                    "exp": exp, "sqrt": sqrt}[node.op](a)
        if isinstance(node, Pow):
            return go(node.base) ** node.exponent
        a, b = go(node.left), go(node.right)
        return {"+": a.__add__, "-": a.__sub__, "*": a.__mul__, "/": a.__truediv__}[node.op](b)

    try:
        return go(expr)
    except JetDomainError as err:
        raise ExprError("domain", expr.span, str(err)) from None


_FLOAT_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "sqrt": math.sqrt}


def evaluate_float(expr: Expr, point) -> float:
    """Plain floating-point value of ``expr``; no derivatives involved."""
    if isinstance(expr, Const):
        return float(expr.value)
    if isinstance(expr, Var):
        return float(point[expr.index])
    if isinstance(expr, Unary):
        a = evaluate_float(expr.arg, point)
        return -a if expr.op == "neg" else _FLOAT_FUNCS[expr.op](a)
    if isinstance(expr, Pow):
        return float(evaluate_float(expr.base, point) ** expr.exponent)
    a, b = evaluate_float(expr.left, point), evaluate_float(expr.right, point)
    if expr.op == "+":
        return a + b
    if expr.op == "-":
        return a - b
    if expr.op == "*":
        return a * b
    return a / b


def compile_sources(sources: Sequence[str], declared_vars: Sequence[str]) -> Tape:
    """Parse and compile several source strings against one coordinate list."""
    exprs = []
    for src in sources:
        exprs.append(parse(src, declared_vars))
    return Tape(exprs, len(declared_vars), sources)
