"""Expression trees over naturals, exact rationals, + - * / ^, log and exp.

Trees are built with ordinary Python operators::

    n = var("n")
    lower = n * (log(n) + log(log(n)) - Fraction(3, 2))

and serialize to a parenthesized prefix form such as
``(mul n (sub (add (log n) (log (log n))) 3/2))``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

import gmpy2
import numpy as np

from .interval import DomainError, FloatIntervals, IntervalScalar

BINARY = ("add", "sub", "mul", "div", "pow", "binom")
UNARY = ("neg", "log", "exp")

# exact powers are expanded only while the result stays this small
EXACT_POW_BITS = 8192

Operand = Union["Expr", int, Fraction]


@dataclass(frozen=True)
class Expr:
    op: str
    args: tuple

    def __post_init__(self) -> None:
        if self.op in BINARY and len(self.args) != 2:
            raise ValueError(f"{self.op} takes two arguments")
        if self.op in UNARY and len(self.args) != 1:
            raise ValueError(f"{self.op} takes one argument")
        if self.op not in BINARY + UNARY + ("var", "const"):
            raise ValueError(f"unknown operator {self.op!r}")

    def __add__(self, o: Operand) -> Expr:
        return Expr("add", (self, wrap(o)))

    def __radd__(self, o: Operand) -> Expr:
        return Expr("add", (wrap(o), self))

    def __sub__(self, o: Operand) -> Expr:
        return Expr("sub", (self, wrap(o)))

    def __rsub__(self, o: Operand) -> Expr:
        return Expr("sub", (wrap(o), self))

    def __mul__(self, o: Operand) -> Expr:
        return Expr("mul", (self, wrap(o)))

    def __rmul__(self, o: Operand) -> Expr:
        return Expr("mul", (wrap(o), self))

    def __truediv__(self, o: Operand) -> Expr:
        return Expr("div", (self, wrap(o)))

    def __rtruediv__(self, o: Operand) -> Expr:
        return Expr("div", (wrap(o), self))

    def __pow__(self, o: Operand) -> Expr:
        return Expr("pow", (self, wrap(o)))

    def __rpow__(self, o: Operand) -> Expr:
        return Expr("pow", (wrap(o), self))

    def __neg__(self) -> Expr:
        return Expr("neg", (self,))

    def variables(self) -> set[str]:
        if self.op == "var":
            return {self.args[0]}
        if self.op == "const":
            return set()
        return set().union(*(a.variables() for a in self.args))

    def to_prefix(self) -> str:
        if self.op == "var":
            return self.args[0]
        if self.op == "const":
            return str(self.args[0])
        return "(" + " ".join([self.op] + [a.to_prefix() for a in self.args]) + ")"

    def __str__(self) -> str:
        return self.to_prefix()


def var(name: str) -> Expr:
    if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", name):
        raise ValueError(f"bad variable name {name!r}")
    return Expr("var", (name,))


def const(q) -> Expr:
    return Expr("const", (Fraction(q),))


def wrap(x: Operand) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return const(x)
    raise TypeError(f"cannot use {type(x).__name__} in an expression; use Fraction")


def log(x: Operand) -> Expr:
    return Expr("log", (wrap(x),))


def exp(x: Operand) -> Expr:
    return Expr("exp", (wrap(x),))


def binom(a: Operand, b: Operand) -> Expr:
    return Expr("binom", (wrap(a), wrap(b)))


# -- prefix text form ----------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def parse(text: str) -> Expr:
    """Inverse of ``Expr.to_prefix``."""
    tokens = _TOKEN.findall(text)
    pos = 0

    def node() -> Expr:
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of expression")
        tok = tokens[pos]
        pos += 1
        if tok == "(":
            if pos >= len(tokens):
                raise ValueError("unexpected end of expression")
            op = tokens[pos]
            pos += 1
            args = []
            while pos < len(tokens) and tokens[pos] != ")":
                args.append(node())
            if pos >= len(tokens):
                raise ValueError("missing ')'")
            pos += 1
            return Expr(op, tuple(args))
        if tok == ")":
            raise ValueError("unexpected ')'")
        if re.fullmatch(r"[-+]?\d+(/\d+)?|[-+]?\d*\.\d+", tok):
            return const(Fraction(tok))
        return var(tok)

    tree = node()
    if pos != len(tokens):
        raise ValueError(f"trailing tokens after expression: {tokens[pos:]}")
    return tree


# -- evaluation ----------------------------------------------------------------

Env = Mapping[str, int]


def _env(env: Env | int) -> Env:
    return {"n": env} if isinstance(env, int) else env


def _exact(node: Expr, env: Env, memo: dict) -> Fraction | None:
    key = id(node)
    if key in memo:
        return memo[key]
    op, args = node.op, node.args
    out: Fraction | None
    if op == "var":
        try:
            out = Fraction(env[args[0]])
        except KeyError:
            raise ValueError(f"unbound variable {args[0]!r}") from None
    elif op == "const":
        out = args[0]
    elif op in ("log", "exp"):
        _exact(args[0], env, memo)
        out = None
    else:
        vals = [_exact(a, env, memo) for a in args]
        if any(v is None for v in vals):
            out = None
        elif op == "add":
            out = vals[0] + vals[1]
        elif op == "sub":
            out = vals[0] - vals[1]
        elif op == "mul":
            out = vals[0] * vals[1]
        elif op == "neg":
            out = -vals[0]
        elif op == "div":
            if vals[1] == 0:
                raise DomainError("division by zero")
            out = vals[0] / vals[1]
        elif op == "binom":
            a, b = vals
            if a.denominator != 1 or b.denominator != 1:
                raise DomainError("binomial of non-integers")
            out = Fraction(int(gmpy2.comb(int(a), int(b)))) if 0 <= b <= a else Fraction(0)
        else:  # pow
            base, e = vals
            size = abs(e) * (base.numerator.bit_length() + base.denominator.bit_length())
            if e.denominator == 1 and size <= EXACT_POW_BITS and not (base == 0 and e < 0):
                out = base ** int(e)
            else:
                out = None
    memo[key] = out
    return out


def exact_value(expr: Expr, env: Env | int) -> Fraction | None:
    """The expression's value as an exact rational, or None if it is not one."""
    return _exact(expr, _env(env), {})


def eval_enclosure(expr: Expr, env: Env | int, bits: int) -> IntervalScalar:
    """Rigorous enclosure of ``expr`` at the given variable values.

    Subtrees with exact rational values are computed exactly and rounded once.
    Raises DomainError when a log, real power or division is not provably
    defined on the enclosure.
    """
    env = _env(env)
    exact: dict = {}
    memo: dict = {}

    def ev(node: Expr) -> IntervalScalar:
        key = id(node)
        if key in memo:
            return memo[key]
        q = _exact(node, env, exact)
        if q is not None:
            out = IntervalScalar.exact(q, bits)
        else:
            op, args = node.op, node.args
            if op == "log":
                out = ev(args[0]).log()
            elif op == "exp":
                out = ev(args[0]).exp()
            elif op == "neg":
                out = -ev(args[0])
            elif op == "add":
                out = ev(args[0]) + ev(args[1])
            elif op == "sub":
                out = ev(args[0]) - ev(args[1])
            elif op == "mul":
                out = ev(args[0]) * ev(args[1])
            elif op == "div":
                out = ev(args[0]) / ev(args[1])
            elif op == "pow":
                k = _exact(args[1], env, exact)
                if k is not None and k.denominator == 1:
                    out = ev(args[0]).pow_int(int(k))
                else:
                    out = ev(args[0]).pow(ev(args[1]))
            elif op == "binom":
                raise DomainError("binomial arguments must be exact integers")
            else:  # pragma: no cover - var/const are always exact
                raise AssertionError(op)
        memo[key] = out
        return out

    return ev(expr)


def eval_float_batch(expr: Expr, env: Mapping[str, np.ndarray]) -> FloatIntervals:
    """float64 enclosures of ``expr`` for every row of ``env`` at once.

    Rows whose result is NaN/inf were not resolved at this level.
    """
    shape = len(next(iter(env.values())))
    memo: dict = {}

    def ev(node: Expr) -> FloatIntervals:
        key = id(node)
        if key in memo:
            return memo[key]
        op, args = node.op, node.args
        if op == "var":
            out = FloatIntervals.from_ints(env[args[0]])
        elif op == "const":
            out = FloatIntervals.const(args[0], shape)
        elif op == "log":
            out = ev(args[0]).log()
        elif op == "exp":
            out = ev(args[0]).exp()
        elif op == "neg":
            out = -ev(args[0])
        elif op == "add":
            out = ev(args[0]) + ev(args[1])
        elif op == "sub":
            out = ev(args[0]) - ev(args[1])
        elif op == "mul":
            out = ev(args[0]) * ev(args[1])
        elif op == "div":
            out = ev(args[0]) / ev(args[1])
        elif op == "pow":
            out = ev(args[0]).pow(ev(args[1]))
        else:  # binom: left to the exact path
            out = FloatIntervals(np.full(shape, np.nan), np.full(shape, np.nan))
        memo[key] = out
        return out

    return ev(expr)
