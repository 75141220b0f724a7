"""A small closed-form scalar expression language.

Grammar (``^`` is right-associative, unary minus applies to a base)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' factor)?
    base   := number | var | func '(' expr ')' | 'pi' '(' ')' | '(' expr ')' | '-' base

So ``-x^2`` parses as ``(-x)^2``.  Variables are ``x, y, z`` and ``x1..x9``;
positional coordinate ``k`` binds both ``("x", "y", "z")[k]`` and ``x{k+1}``.
The Unicode minus sign is accepted as ``-``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ParseError, UnboundVariableError

VARIABLES = ("x", "y", "z") + tuple(f"x{i}" for i in range(1, 10))
FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "log": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "tanh": np.tanh,
}
FLAGS = ("divide_by_zero", "invalid", "overflow")


@dataclass(frozen=True)
class Num:
    value: float

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError("number literals are nonnegative; use Neg for signs")


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Expr | None"


Expr = Union[Num, Var, Neg, BinOp, Call]

# ---------------------------------------------------------------------------
# lexer

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
                    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()−]))")
_BASE_EXPECTED = ("number", "variable", "function", "(", "-")


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    offset: int


def _tokenize(text):
    prefix = [0]
    for ch in text:
        prefix.append(prefix[-1] + len(ch.encode("utf-8")))
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            rest = text[pos:]
            if not rest.strip():
                break
            bad = pos + len(rest) - len(rest.lstrip())
            toks.append(_Tok("bad", text[bad], prefix[bad]))
            return toks
        kind = m.lastgroup
        tok = m.group(kind)
        start = m.start(kind)
        if tok == "−":
            tok = "-"
        toks.append(_Tok(kind, tok, prefix[start]))
        pos = m.end()
    toks.append(_Tok("end", "", prefix[len(text)]))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, text, expected):
        tok = self.peek()
        if tok.text != text or tok.kind != "op":
            raise ParseError(f"unexpected {self._describe(tok)}", tok.offset, expected)
        return self.take()

    @staticmethod
    def _describe(tok):
        if tok.kind == "bad":
            return f"character {tok.text!r}"
        return "end of input" if tok.kind == "end" else f"token {tok.text!r}"

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"unexpected {self._describe(tok)}", tok.offset,
                             ("+", "-", "*", "/", "^", "end of input"))
        return e

    def expr(self):
        left = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            left = BinOp(op, left, self.term())
        return left

    def term(self):
        left = self.factor()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.take().text
            left = BinOp(op, left, self.factor())
        return left

    def factor(self):
        base = self.base()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.take()
            return BinOp("^", base, self.factor())
        return base

    def base(self):
        tok = self.peek()
        if tok.kind == "num":
            self.take()
            return Num(float(tok.text))
        if tok.kind == "ident":
            self.take()
            if tok.text == "pi":
                self.expect("(", ("(",))
                self.expect(")", (")",))
                return Call("pi", None)
            if tok.text in FUNCTIONS:
                self.expect("(", ("(",))
                arg = self.expr()
                self.expect(")", (")", "+", "-", "*", "/", "^"))
                return Call(tok.text, arg)
            if tok.text in VARIABLES:
                return Var(tok.text)
            raise ParseError(f"unknown identifier {tok.text!r}", tok.offset,
                             ("variable", "function"))
        if tok.kind == "op" and tok.text == "(":
            self.take()
            inner = self.expr()
            self.expect(")", (")", "+", "-", "*", "/", "^"))
            return inner
        if tok.kind == "op" and tok.text == "-":
            self.take()
            return Neg(self.base())
        raise ParseError(f"unexpected {self._describe(tok)}", tok.offset, _BASE_EXPECTED)


def parse(text):
    """Parse expression text into an AST; raises ParseError with a byte offset."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    return _Parser(text).parse()


def to_text(e):
    """Fully parenthesized source text; ``parse(to_text(e)) == e``."""
    if isinstance(e, Num):
        return "1e999" if math.isinf(e.value) else repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        return f"(-{to_text(e.operand)})"
    if isinstance(e, BinOp):
        return f"({to_text(e.left)}{e.op}{to_text(e.right)})"
    if isinstance(e, Call):
        return "pi()" if e.func == "pi" else f"{e.func}({to_text(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# evaluation

def _finite(a):
    return np.all(np.isfinite(a))


def _eval(e, env, flags):
    if isinstance(e, Num):
        return np.float64(e.value)
    if isinstance(e, Var):
        if e.name not in env:
            raise UnboundVariableError(e.name)
        return env[e.name]
    if isinstance(e, Neg):
        return -_eval(e.operand, env, flags)
    if isinstance(e, Call):
        if e.func == "pi":
            return np.float64(math.pi)
        a = _eval(e.arg, env, flags)
        with np.errstate(all="ignore"):
            out = FUNCTIONS[e.func](a)
        if e.func == "log" and np.any(a == 0):
            flags.add("divide_by_zero")
        if e.func in ("log", "sqrt") and np.any(a < 0):
            flags.add("invalid")
        if e.func == "exp" and _finite(a) and not _finite(out):
            flags.add("overflow")
        return out
    if isinstance(e, BinOp):
        a = _eval(e.left, env, flags)
        b = _eval(e.right, env, flags)
        with np.errstate(all="ignore"):
            if e.op == "+":
                out = a + b
            elif e.op == "-":
                out = a - b
            elif e.op == "*":
                out = a * b
            elif e.op == "/":
                out = a / b
            else:
                out = np.power(a, b)
        ok_in = _finite(a) and _finite(b)
        if e.op == "/" and np.any(b == 0):
            shape = np.broadcast(a, b).shape
            num = np.broadcast_to(a, shape)[np.broadcast_to(b, shape) == 0]
            if np.any(num == 0) or np.any(np.isnan(num)):
                flags.add("invalid")
            if np.any((num != 0) & ~np.isnan(num)):
                flags.add("divide_by_zero")
        elif ok_in and np.any(np.isnan(out)):
            flags.add("invalid")
        elif ok_in and not _finite(out):
            flags.add("divide_by_zero" if e.op == "^" and np.any(a == 0) else "overflow")
        return out
    raise TypeError(f"not an expression node: {e!r}")


def evaluate_checked(e, bindings):
    """Evaluate with IEEE semantics; returns ``(value, flags)``."""
    env = {k: np.asarray(v, dtype=float) for k, v in bindings.items()}
    flags = set()
    val = _eval(e, env, flags)
    if np.ndim(val) == 0:
        val = float(val)
    return val, frozenset(flags)


def evaluate(e, bindings):
    return evaluate_checked(e, bindings)[0]


def variables(e):
    """Names of the variables used in ``e``."""
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return variables(e.operand)
    if isinstance(e, BinOp):
        return variables(e.left) | variables(e.right)
    if isinstance(e, Call) and e.arg is not None:
        return variables(e.arg)
    return set()


@dataclass(frozen=True)
class CompiledExpr:
    """Callable ``f(*coords)``; works elementwise on numpy arrays."""

    expr: Expr
    source: str = ""

    def __call__(self, *coords):
        env = {}
        for k, c in enumerate(coords):
            if k < 3:
                env[("x", "y", "z")[k]] = c
            if k < 9:
                env[f"x{k + 1}"] = c
        val = evaluate(self.expr, env)
        shape = np.broadcast(*[np.asarray(c) for c in coords]).shape if coords else ()
        return np.broadcast_to(val, shape).copy() if shape else val


def compile_expr(text):
    e = parse(text) if isinstance(text, (str, bytes)) else text
    return CompiledExpr(e, text if isinstance(text, str) else to_text(e))
