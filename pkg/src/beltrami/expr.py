"""A small arithmetic expression language with symbolic differentiation.

Grammar (loosest binding first)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := '-' unary | power
    power := atom ('^' unary)?
    atom  := number | variable | 'pi' | func '(' expr ')' | '(' expr ')'

Expressions are immutable trees.  ``str(e)`` prints with the fewest
parentheses that reparse to the same tree.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ParseError, UnboundVariable

VARIABLES = frozenset({"x", "y", "z", "r", "theta", "t"})
FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "sqrt", "tanh", "atan")

_UFUNC = {
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
    "tanh": np.tanh,
    "atan": np.arctan,
}


class Expr:
    """Base node. Subclasses are frozen dataclasses."""

    def evaluate(self, bindings=None):
        bindings = {} if bindings is None else bindings
        with np.errstate(all="ignore"):
            out = self._eval(bindings)
        if np.ndim(out) == 0:
            return float(out)
        return out

    def __call__(self, **bindings):
        return self.evaluate(bindings)

    def diff(self, var):
        return differentiate(self, var)

    def variables(self):
        return frozenset()

    def __str__(self):
        return to_string(self)

    def _eval(self, b):
        raise NotImplementedError


@dataclass(frozen=True, repr=False)
class Num(Expr):
    value: float

    def _eval(self, b):
        return self.value

    def __repr__(self):
        return f"Num({self.value!r})"


@dataclass(frozen=True, repr=False)
class Const(Expr):
    name: str = "pi"

    def _eval(self, b):
        return math.pi

    def __repr__(self):
        return "Const('pi')"


@dataclass(frozen=True, repr=False)
class Var(Expr):
    name: str

    def _eval(self, b):
        try:
            return b[self.name]
        except KeyError:
            raise UnboundVariable(self.name) from None

    def variables(self):
        return frozenset({self.name})

    def __repr__(self):
        return f"Var({self.name!r})"


@dataclass(frozen=True, repr=False)
class Neg(Expr):
    arg: Expr

    def _eval(self, b):
        return -self.arg._eval(b)

    def variables(self):
        return self.arg.variables()

    def __repr__(self):
        return f"Neg({self.arg!r})"


@dataclass(frozen=True, repr=False)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr

    def _eval(self, b):
        a = self.left._eval(b)
        c = self.right._eval(b)
        return _apply(self.op, a, c)

    def variables(self):
        return self.left.variables() | self.right.variables()

    def __repr__(self):
        return f"BinOp({self.op!r}, {self.left!r}, {self.right!r})"


@dataclass(frozen=True, repr=False)
class Call(Expr):
    fn: str
    arg: Expr

    def _eval(self, b):
        a = self.arg._eval(b)
        if self.fn == "ln" and np.any(np.asarray(a) <= 0):
            raise DomainError("ln of a non-positive value")
        if self.fn == "sqrt" and np.any(np.asarray(a) < 0):
            raise DomainError("sqrt of a negative value")
        return _UFUNC[self.fn](a)

    def variables(self):
        return self.arg.variables()

    def __repr__(self):
        return f"Call({self.fn!r}, {self.arg!r})"


def _apply(op, a, c):
    if op == "+":
        return a + c
    if op == "-":
        return a - c
    if op == "*":
        return a * c
    if op == "/":
        if np.any(np.asarray(c) == 0):
            raise DomainError("division by zero")
        return np.true_divide(a, c)
    if op == "^":
        a_arr, c_arr = np.asarray(a, dtype=float), np.asarray(c, dtype=float)
        bad_base = (a_arr < 0) & (c_arr != np.round(c_arr))
        if np.any(bad_base):
            raise DomainError("negative base raised to a non-integer power")
        if np.any((a_arr == 0) & (c_arr < 0)):
            raise DomainError("division by zero")
        return np.power(a_arr, c_arr)
    raise ValueError(f"unknown operator {op!r}")


# ----------------------------------------------------------------------------
# constructors with literal folding

def num(v):
    return Num(float(v))


def neg(a):
    if isinstance(a, Num):
        return Num(-a.value)
    return Neg(a)


def binop(op, a, b):
    if isinstance(a, Num) and isinstance(b, Num):
        try:
            v = _apply(op, a.value, b.value)
        except DomainError:
            return BinOp(op, a, b)
        v = float(v)
        if math.isfinite(v):
            return Num(v)
    return BinOp(op, a, b)


def call(fn, a):
    if isinstance(a, Num):
        try:
            v = float(Call(fn, a)._eval({}))
        except DomainError:
            return Call(fn, a)
        if math.isfinite(v):
            return Num(v)
    return Call(fn, a)


# ----------------------------------------------------------------------------
# printing

def _prec(e):
    if isinstance(e, Num):
        return 3 if e.value < 0 else 5
    if isinstance(e, Neg):
        return 3
    if isinstance(e, BinOp):
        return {"+": 1, "-": 1, "*": 2, "/": 2, "^": 4}[e.op]
    return 5


def _num_text(v):
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v)) if v != 0 else "0"
    return repr(v)


def to_string(e):
    if isinstance(e, Num):
        return _num_text(e.value)
    if isinstance(e, Const):
        return "pi"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Call):
        return f"{e.fn}({to_string(e.arg)})"
    if isinstance(e, Neg):
        inner = to_string(e.arg)
        return "-" + (f"({inner})" if _prec(e.arg) < 3 else inner)
    p = _prec(e)
    ls, rs = to_string(e.left), to_string(e.right)
    lp, rp = _prec(e.left), _prec(e.right)
    if e.op == "^":
        if lp <= 4:
            ls = f"({ls})"
        if rp < 3:
            rs = f"({rs})"
        return f"{ls}^{rs}"
    if lp < p:
        ls = f"({ls})"
    if rp <= p:
        rs = f"({rs})"
    if e.op in "+-":
        return f"{ls} {e.op} {rs}"
    return f"{ls}{e.op}{rs}"


# ----------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^()]))"
)


def _tokenize(text):
    toks = []
    pos = 0
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            break
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", len(text[:pos].encode()),
                             {"number", "identifier", "operator"})
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), len(text[:start].encode())))
        pos = m.end()
    toks.append(("end", "", len(text.encode())))
    return toks


_ATOM_START = frozenset({"number", "variable", "function", "pi", "'('"})


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

    def fail(self, msg, expected):
        raise ParseError(msg, self.peek()[2], expected)

    def expect(self, value):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != value:
            self.fail(f"unexpected {tok[1] or 'end of input'!r}", {repr(value)})
        return self.take()

    def parse(self):
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}", {"operator", "end of input"})
        return e

    def expr(self):
        e = self.term()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            e = BinOp(op, e, self.term())
        return e

    def term(self):
        e = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            e = BinOp(op, e, self.unary())
        return e

    def unary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "-":
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "^":
            self.take()
            return BinOp("^", base, self.unary())
        return base

    def atom(self):
        kind, val, off = self.peek()
        if kind == "num":
            self.take()
            return Num(float(val))
        if kind == "id":
            self.take()
            if val == "pi":
                return Const()
            if val in VARIABLES:
                return Var(val)
            if val in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(val, arg)
            raise ParseError(f"unknown identifier {val!r}", off, _ATOM_START)
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        self.fail(f"unexpected {val or 'end of input'!r}", _ATOM_START | {"'-'"})


def parse(text: str) -> Expr:
    """Parse expression text into an ``Expr``."""
    return _Parser(text).parse()


def as_expr(obj) -> Expr:
    if isinstance(obj, Expr):
        return obj
    if isinstance(obj, (int, float)):
        return num(obj)
    return parse(str(obj))


# ----------------------------------------------------------------------------
# differentiation

def differentiate(e: Expr, v: str) -> Expr:
    """Exact derivative of ``e`` with respect to variable ``v``."""
    if v not in VARIABLES:
        raise ValueError(f"{v!r} is not a variable of the language")
    if v not in e.variables():
        return Num(0.0)
    if isinstance(e, Var):
        return Num(1.0)
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, v))
    if isinstance(e, Call):
        a = e.arg
        da = differentiate(a, v)
        fn = e.fn
        if fn == "sin":
            outer = call("cos", a)
        elif fn == "cos":
            outer = neg(call("sin", a))
        elif fn == "tan":
            outer = binop("+", Num(1.0), binop("^", call("tan", a), Num(2.0)))
        elif fn == "exp":
            outer = call("exp", a)
        elif fn == "ln":
            return binop("/", da, a)
        elif fn == "sqrt":
            return binop("/", da, binop("*", Num(2.0), call("sqrt", a)))
        elif fn == "tanh":
            outer = binop("-", Num(1.0), binop("^", call("tanh", a), Num(2.0)))
        elif fn == "atan":
            return binop("/", da, binop("+", Num(1.0), binop("^", a, Num(2.0))))
        else:  # pragma: no cover
            raise ValueError(fn)
        return binop("*", outer, da)
    a, b = e.left, e.right
    la, lb = v in a.variables(), v in b.variables()
    op = e.op
    if op in "+-":
        if not la:
            db = differentiate(b, v)
            return db if op == "+" else neg(db)
        if not lb:
            return differentiate(a, v)
        return binop(op, differentiate(a, v), differentiate(b, v))
    if op == "*":
        if not la:
            return binop("*", a, differentiate(b, v))
        if not lb:
            return binop("*", differentiate(a, v), b)
        return binop("+", binop("*", differentiate(a, v), b), binop("*", a, differentiate(b, v)))
    if op == "/":
        if not lb:
            return binop("/", differentiate(a, v), b)
        num_ = binop("-", binop("*", differentiate(a, v), b), binop("*", a, differentiate(b, v)))
        return binop("/", num_, binop("^", b, Num(2.0)))
    if op == "^":
        if not lb:
            return binop("*", binop("*", b, binop("^", a, binop("-", b, Num(1.0)))), differentiate(a, v))
        # general power a^b = exp(b ln a)
        inner = binop("*", differentiate(b, v), call("ln", a))
        if la:
            inner = binop("+", inner, binop("/", binop("*", b, differentiate(a, v)), a))
        return binop("*", e, inner)
    raise ValueError(f"unknown operator {op!r}")  # pragma: no cover


def sample(e, grid):
    """Evaluate an expression at every node of ``grid``."""
    from .grid import ScalarFieldGrid

    e = as_expr(e)
    vals = e.evaluate(grid.bindings())
    vals = np.broadcast_to(np.asarray(vals, dtype=float), grid.dims).copy()
    return ScalarFieldGrid(grid, vals)
