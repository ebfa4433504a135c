"""A small expression language for user-supplied functions f, plus the tagged
function descriptions (polynomial / expression / excised / pure exponential)
that carry the growth metadata |f(t)| <= K e^{At} needed by the operator
preconditions.

Grammar (also documented in the README)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-' factor | base ('^' integer)?
    base   := number | 'x' | ident '(' expr ')' | '(' expr ')'

Precedence is ^  >  unary-  >  * /  >  + - ; exponents are literal integers.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import _backend, _program
from .diffop import Polynomial
from .errors import (
    DomainError,
    EvalDomainError,
    ExpressionSyntaxError,
    NonDifferentiableError,
    SzmdError,
    UnknownIdentifierError,
)

__all__ = [
    "BinOp",
    "Call",
    "Const",
    "Expr",
    "FunctionSpec",
    "Neg",
    "Pow",
    "Var",
    "differentiate",
    "eval_expr",
    "excised_function",
    "exp_growth_function",
    "expression_function",
    "parse",
    "polynomial_function",
    "to_string",
]


# ---------------------------------------------------------------------------
# AST


class Expr:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: float
    offset: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Var(Expr):
    offset: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr
    offset: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Neg(Expr):
    operand: Expr
    offset: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Pow(Expr):
    base: Expr
    exponent: int
    offset: int = field(default=-1, compare=False, repr=False)


@dataclass(frozen=True, slots=True)
class Call(Expr):
    func: str  # exp | sin | cos | abs | sqrt
    arg: Expr
    offset: int = field(default=-1, compare=False, repr=False)


_FUNCTIONS = ("exp", "sin", "cos", "abs", "sqrt")


# ---------------------------------------------------------------------------
# Parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)


def _tokenize(text: str):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            rest = text[pos:].lstrip()
            if not rest:
                break
            offset = len(text) - len(rest)
            raise ExpressionSyntaxError(
                f"unexpected character {rest[0]!r}", offset
            )
        if m.group("num") is not None:
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.group("ident") is not None:
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("op", m.group("op"), m.start("op")))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def fail(self, message, expected=None):
        kind, value, offset = self.peek()
        raise ExpressionSyntaxError(message, offset, expected)

    def expect_op(self, op):
        kind, value, offset = self.peek()
        if kind != "op" or value != op:
            self.fail(f"got {value!r}" if value else "unexpected end of input",
                      expected=repr(op))
        return self.advance()

    def parse(self) -> Expr:
        e = self.parse_expr()
        kind, value, offset = self.peek()
        if kind != "end":
            self.fail(f"unexpected trailing input {value!r}")
        return e

    def parse_expr(self) -> Expr:
        e = self.parse_term()
        while True:
            kind, value, offset = self.peek()
            if kind == "op" and value in "+-":
                self.advance()
                rhs = self.parse_term()
                e = BinOp(value, e, rhs, offset=offset)
            else:
                return e

    def parse_term(self) -> Expr:
        e = self.parse_factor()
        while True:
            kind, value, offset = self.peek()
            if kind == "op" and value in "*/":
                self.advance()
                rhs = self.parse_factor()
                e = BinOp(value, e, rhs, offset=offset)
            else:
                return e

    def parse_factor(self) -> Expr:
        kind, value, offset = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            operand = self.parse_factor()
            if isinstance(operand, Const):
                return Const(-operand.value, offset=offset)
            return Neg(operand, offset=offset)
        base = self.parse_base()
        kind, value, offset = self.peek()
        if kind == "op" and value == "^":
            self.advance()
            exponent = self.parse_integer()
            return Pow(base, exponent, offset=offset)
        return base

    def parse_integer(self) -> int:
        sign = 1
        kind, value, offset = self.peek()
        if kind == "op" and value == "-":
            self.advance()
            sign = -1
            kind, value, offset = self.peek()
        if kind != "num" or any(c in value for c in ".eE"):
            self.fail("exponent must be a literal integer", expected="integer")
        self.advance()
        return sign * int(value)

    def parse_base(self) -> Expr:
        kind, value, offset = self.peek()
        if kind == "num":
            self.advance()
            return Const(float(value), offset=offset)
        if kind == "ident":
            self.advance()
            if value == "x":
                return Var(offset=offset)
            nkind, nvalue, _ = self.peek()
            if nkind == "op" and nvalue == "(":
                if value not in _FUNCTIONS:
                    raise UnknownIdentifierError(
                        f"unknown function {value!r}", offset,
                        expected="one of " + ", ".join(_FUNCTIONS),
                    )
                self.advance()
                arg = self.parse_expr()
                self.expect_op(")")
                return Call(value, arg, offset=offset)
            raise UnknownIdentifierError(
                f"unknown identifier {value!r}", offset,
                expected="'x' or a function call",
            )
        if kind == "op" and value == "(":
            self.advance()
            e = self.parse_expr()
            self.expect_op(")")
            return e
        self.fail(
            f"got {value!r}" if value else "unexpected end of input",
            expected="a number, 'x', '(' or a function name",
        )


def parse(text: str) -> Expr:
    """Parse infix text into an AST; raises ExpressionSyntaxError with the
    byte offset of the failure."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# Evaluation (scalar, strict)


def eval_expr(e: Expr, t: float) -> float:
    """Evaluate at a scalar point with strict domain checking."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return float(t)
    if isinstance(e, Neg):
        return -eval_expr(e.operand, t)
    if isinstance(e, BinOp):
        a = eval_expr(e.left, t)
        b = eval_expr(e.right, t)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0.0:
            raise EvalDomainError("division by zero", e.offset)
        return a / b
    if isinstance(e, Pow):
        base = eval_expr(e.base, t)
        if base == 0.0 and e.exponent < 0:
            raise EvalDomainError("zero raised to a negative power", e.offset)
        return float(base ** e.exponent)
    if isinstance(e, Call):
        arg = eval_expr(e.arg, t)
        try:
            if e.func == "exp":
                return math.exp(arg)
            if e.func == "sin":
                return math.sin(arg)
            if e.func == "cos":
                return math.cos(arg)
            if e.func == "abs":
                return abs(arg)
            if arg < 0.0:
                raise EvalDomainError("sqrt of a negative value", e.offset)
            return math.sqrt(arg)
        except OverflowError:
            raise EvalDomainError("overflow in function evaluation", e.offset) from None
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# Symbolic differentiation with light simplification


def _const(v: float) -> Const:
    return Const(float(v))


_ZERO = _const(0.0)
_ONE = _const(1.0)


def _is_const(e, v=None):
    return isinstance(e, Const) and (v is None or e.value == v)


def _add(a, b):
    if _is_const(a) and _is_const(b):
        return _const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return BinOp("+", a, b)


def _sub(a, b):
    if _is_const(a) and _is_const(b):
        return _const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return _neg(b)
    return BinOp("-", a, b)


def _mul(a, b):
    if _is_const(a) and _is_const(b):
        return _const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return _ZERO
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    if _is_const(a, -1.0):
        return _neg(b)
    if _is_const(b, -1.0):
        return _neg(a)
    if _is_const(b) and not _is_const(a):
        return _mul(b, a)
    # gather constant prefactors: c1 * (c2 * e) -> (c1 c2) * e
    if _is_const(a) and isinstance(b, BinOp) and b.op == "*" and _is_const(b.left):
        return _mul(_const(a.value * b.left.value), b.right)
    return BinOp("*", a, b)


def _div(a, b):
    if _is_const(a, 0.0):
        return _ZERO
    if _is_const(b, 1.0):
        return a
    if _is_const(a) and _is_const(b) and b.value != 0.0:
        return _const(a.value / b.value)
    return BinOp("/", a, b)


def _neg(a):
    if _is_const(a):
        return _const(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def _pow(base, exponent: int):
    if exponent == 0:
        return _ONE
    if exponent == 1:
        return base
    if _is_const(base):
        return _const(base.value ** exponent)
    return Pow(base, exponent)


def _call(func, arg):
    if _is_const(arg):
        try:
            return _const(eval_expr(Call(func, arg), 0.0))
        except SzmdError:
            pass
    return Call(func, arg)


def _derivative(e: Expr) -> Expr:
    if isinstance(e, Const):
        return _ZERO
    if isinstance(e, Var):
        return _ONE
    if isinstance(e, Neg):
        return _neg(_derivative(e.operand))
    if isinstance(e, BinOp):
        da, db = _derivative(e.left), _derivative(e.right)
        if e.op == "+":
            return _add(da, db)
        if e.op == "-":
            return _sub(da, db)
        if e.op == "*":
            return _add(_mul(da, e.right), _mul(e.left, db))
        return _div(
            _sub(_mul(da, e.right), _mul(e.left, db)), _pow(e.right, 2)
        )
    if isinstance(e, Pow):
        db = _derivative(e.base)
        return _mul(_mul(_const(e.exponent), _pow(e.base, e.exponent - 1)), db)
    if isinstance(e, Call):
        da = _derivative(e.arg)
        if e.func == "exp":
            return _mul(Call("exp", e.arg), da)
        if e.func == "sin":
            return _mul(_call("cos", e.arg), da)
        if e.func == "cos":
            return _neg(_mul(_call("sin", e.arg), da))
        if e.func == "sqrt":
            return _div(da, _mul(_const(2.0), Call("sqrt", e.arg)))
        raise NonDifferentiableError("abs is not differentiable")
    raise TypeError(f"not an expression node: {e!r}")


def differentiate(e: Expr, times: int = 1) -> Expr:
    """Symbolic derivative with constant folding; rejects abs nodes."""
    if times < 0:
        raise DomainError(f"derivative order must be nonnegative, got {times}")
    out = e
    for _ in range(times):
        out = _derivative(out)
    return out


# ---------------------------------------------------------------------------
# Pretty printer

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_NEG, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _level(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _LEVEL_ADD if e.op in "+-" else _LEVEL_MUL
    if isinstance(e, Neg):
        return _LEVEL_NEG
    if isinstance(e, Pow):
        return _LEVEL_POW
    if isinstance(e, Const) and e.value < 0:
        return _LEVEL_NEG
    return _LEVEL_ATOM


def _fmt(e: Expr, min_level: int) -> str:
    mine = _level(e)
    text = _fmt_inner(e)
    if mine < min_level:
        return f"({text})"
    return text


def _fmt_inner(e: Expr) -> str:
    if isinstance(e, Const):
        return repr(e.value) if e.value >= 0 else "-" + repr(-e.value)
    if isinstance(e, Var):
        return "x"
    if isinstance(e, BinOp):
        if e.op in "+-":
            # right operand needs parens at equal level: a - (b + c)
            return f"{_fmt(e.left, _LEVEL_ADD)} {e.op} {_fmt(e.right, _LEVEL_ADD + 1)}"
        return f"{_fmt(e.left, _LEVEL_MUL)}{e.op}{_fmt(e.right, _LEVEL_MUL + 1)}"
    if isinstance(e, Neg):
        return "-" + _fmt(e.operand, _LEVEL_NEG)
    if isinstance(e, Pow):
        return f"{_fmt(e.base, _LEVEL_ATOM)}^{e.exponent}"
    if isinstance(e, Call):
        return f"{e.func}({_fmt_inner(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")


def to_string(e: Expr) -> str:
    """Render an AST back to parseable text (parse . to_string == identity)."""
    return _fmt_inner(e)


# ---------------------------------------------------------------------------
# Function specifications


class FunctionSpec:
    """A function on [0, inf) with declared growth |f(t)| <= K e^{At}.

    Concrete kinds: polynomial (exact coefficients), parsed expression,
    pure exponential e^{At}, and an excised wrapper that forces the value to
    zero on a window (used by the localization experiments).
    """

    growth_A: float
    growth_K: float

    def value(self, t: float) -> float:
        raise NotImplementedError

    def program(self) -> _program.Program:
        raise NotImplementedError

    def values(self, t) -> np.ndarray:
        """Vectorized evaluation through the active kernel backend."""
        prog = self.program()
        t = np.asarray(t, dtype=np.float64)
        out = _backend.kernels().eval_program(prog.code, prog.consts, t)
        bad = ~np.isfinite(out)
        if bad.any():
            where = float(np.asarray(t).ravel()[np.flatnonzero(bad.ravel())[0]])
            raise EvalDomainError(f"non-finite function value at t={where!r}")
        return out

    def derivatives_at(self, x: float, max_order: int) -> list[float]:
        """[f(x), f'(x), ..., f^(max_order)(x)]."""
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        """Points in (0, inf) where the function is not smooth."""
        return ()

    def as_polynomial(self):
        return None

    def __call__(self, t: float) -> float:
        return self.value(t)


class PolynomialFunction(FunctionSpec):
    """Exact polynomial; growth constants are computed, not declared.

    With A = 1, the least K with |p(t)| <= K e^t on [0, inf) is the maximum of
    |p(t)| e^{-t}, attained at t = 0 or at a root of p' - p.
    """

    def __init__(self, poly: Polynomial):
        self.poly = poly
        if poly.degree <= 0:
            # constants are bounded: the envelope K e^{0 t} is exact
            self.growth_A = 0.0
            self.growth_K = max(abs(float(poly.evaluate(0.0))), 5e-324)
        else:
            self.growth_A = 1.0
            self.growth_K = self._sup_bound()
        self._program = None
        self._derivs = [poly]

    def _sup_bound(self) -> float:
        cs = [float(c) for c in self.poly.coeffs]
        if not cs:
            return 5e-324
        candidates = [0.0]
        diff = [float(c) for c in (self.poly.derivative() - self.poly).coeffs]
        if len(diff) > 1:
            roots = np.polynomial.polynomial.polyroots(diff)
            for r in roots:
                if abs(r.imag) <= 1e-9 * (1.0 + abs(r.real)) and r.real > 0:
                    candidates.append(float(r.real))
        best = max(abs(self.poly.evaluate(t)) * math.exp(-t) for t in candidates)
        return max(best * (1.0 + 1e-9), 5e-324)

    def value(self, t: float) -> float:
        return float(self.poly.evaluate(float(t)))

    def program(self):
        if self._program is None:
            self._program = _program.compile_polynomial(
                [float(c) for c in self.poly.coeffs]
            )
        return self._program

    def derivatives_at(self, x, max_order):
        while len(self._derivs) <= max_order:
            self._derivs.append(self._derivs[-1].derivative())
        return [float(self._derivs[k].evaluate(float(x))) for k in range(max_order + 1)]

    def as_polynomial(self):
        return self.poly


class ExpressionFunction(FunctionSpec):
    """A parsed expression with user-declared growth constants.

    Growth inference for arbitrary expressions is not attempted; the caller
    asserts |f(t)| <= K e^{At}.  Breakpoints (kinks) can be declared, and
    kinks of the form abs(affine in x) are detected automatically so the
    quadrature can split panels there.
    """

    def __init__(self, expr, growth_A=1.0, growth_K=1.0, breakpoints=None):
        if isinstance(expr, str):
            expr = parse(expr)
        if growth_A < 0 or not growth_K > 0:
            raise DomainError("growth constants require A >= 0 and K > 0")
        self.expr = expr
        self.growth_A = float(growth_A)
        self.growth_K = float(growth_K)
        self._declared_breakpoints = breakpoints
        self._program = None
        self._derivs = [expr]

    def value(self, t: float) -> float:
        return eval_expr(self.expr, t)

    def program(self):
        if self._program is None:
            self._program = _program.compile_expr(self.expr)
        return self._program

    def derivatives_at(self, x, max_order):
        while len(self._derivs) <= max_order:
            self._derivs.append(differentiate(self._derivs[-1]))
        return [eval_expr(self._derivs[k], x) for k in range(max_order + 1)]

    def breakpoints(self):
        if self._declared_breakpoints is not None:
            return tuple(sorted(self._declared_breakpoints))
        return tuple(_detect_abs_kinks(self.expr))


def _detect_abs_kinks(e: Expr) -> list[float]:
    """Roots of abs(...) arguments that are affine in x; kink candidates for
    panel splitting.  Best effort: a missed kink only costs quadrature panels.
    """
    found = set()

    def walk(node):
        if isinstance(node, Call):
            if node.func == "abs":
                try:
                    g = [eval_expr(node.arg, t) for t in (0.0, 0.5, 1.0, 2.0)]
                except SzmdError:
                    g = None
                if g is not None:
                    scale = 1.0 + max(abs(v) for v in g)
                    affine = (
                        abs(g[0] - 2.0 * g[1] + g[2]) <= 1e-12 * scale
                        and abs(g[0] - 2.0 * g[2] + g[3]) <= 1e-12 * scale
                    )
                    slope = g[2] - g[0]
                    if affine and slope != 0.0:
                        r = -g[0] / slope
                        if r > 0.0 and math.isfinite(r):
                            found.add(r)
            walk(node.arg)
        elif isinstance(node, BinOp):
            walk(node.left)
            walk(node.right)
        elif isinstance(node, Neg):
            walk(node.operand)
        elif isinstance(node, Pow):
            walk(node.base)

    walk(e)
    return sorted(found)


class ExpGrowthFunction(FunctionSpec):
    """The pure exponential e^{At}; its own growth envelope with K = 1."""

    def __init__(self, a: float):
        if a < 0:
            raise DomainError(f"growth rate must be nonnegative, got {a}")
        self.a = float(a)
        self.growth_A = self.a
        self.growth_K = 1.0
        self._program = None

    def value(self, t: float) -> float:
        return math.exp(self.a * t)

    def program(self):
        if self._program is None:
            self._program = _program.compile_exp_growth(self.a)
        return self._program

    def derivatives_at(self, x, max_order):
        fx = math.exp(self.a * x)
        return [fx * self.a ** k for k in range(max_order + 1)]


class ExcisedFunction(FunctionSpec):
    """inner(t) forced to exactly zero on the open window |t - center| < delta."""

    def __init__(self, inner: FunctionSpec, center: float, delta: float):
        if not delta > 0:
            raise DomainError(f"delta must be positive, got {delta}")
        self.inner = inner
        self.center = float(center)
        self.delta = float(delta)
        self.lo = self.center - self.delta
        self.hi = self.center + self.delta
        self.growth_A = inner.growth_A
        self.growth_K = inner.growth_K
        self._program = None

    def value(self, t: float) -> float:
        if self.lo < t < self.hi:
            return 0.0
        return self.inner.value(t)

    def program(self):
        if self._program is None:
            self._program = _program.wrap_zero_window(
                self.inner.program(), self.lo, self.hi
            )
        return self._program

    def derivatives_at(self, x, max_order):
        if self.lo < x < self.hi:
            return [0.0] * (max_order + 1)
        if x == self.lo or x == self.hi:
            raise DomainError("not smooth at the excision boundary")
        return self.inner.derivatives_at(x, max_order)

    def breakpoints(self):
        pts = {b for b in self.inner.breakpoints() if not self.lo < b < self.hi}
        for edge in (self.lo, self.hi):
            if edge > 0:
                pts.add(edge)
        return tuple(sorted(pts))


def polynomial_function(coeffs) -> PolynomialFunction:
    """FunctionSpec for sum_i coeffs[i] x^i (exact rational coefficients)."""
    if isinstance(coeffs, Polynomial):
        return PolynomialFunction(coeffs)
    return PolynomialFunction(Polynomial(tuple(coeffs)))


def expression_function(expr, growth_A=1.0, growth_K=1.0, breakpoints=None):
    """FunctionSpec for a parsed expression with declared growth constants."""
    return ExpressionFunction(expr, growth_A, growth_K, breakpoints)


def exp_growth_function(a: float) -> ExpGrowthFunction:
    """FunctionSpec for e^{at}."""
    return ExpGrowthFunction(a)


def excised_function(inner: FunctionSpec, center: float, delta: float):
    """FunctionSpec equal to ``inner`` but exactly zero for |t-center| < delta."""
    return ExcisedFunction(inner, center, delta)
