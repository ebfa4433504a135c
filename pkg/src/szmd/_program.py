"""Flat stack-machine programs for fast vectorized function evaluation.

Both kernel backends (compiled and pure NumPy) execute the same opcode
stream, so a function compiled once evaluates identically under either.
The opcode numbering is mirrored in _kernels.pyx and must not change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

OP_CONST = 0  # arg: index into consts
OP_X = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_POW = 6  # arg: literal integer exponent
OP_NEG = 7
OP_EXP = 8
OP_SIN = 9
OP_COS = 10
OP_ABS = 11
OP_SQRT = 12
OP_ZERO_IN = 13  # args: const indices (lo, hi); zero the top where lo < t < hi

MAX_STACK = 64


@dataclass(frozen=True)
class Program:
    code: np.ndarray  # int32
    consts: np.ndarray  # float64
    stack_need: int


class _Builder:
    def __init__(self):
        self.code: list[int] = []
        self.consts: list[float] = []
        self._const_index: dict[float, int] = {}
        self.depth = 0
        self.max_depth = 0

    def _push(self, delta: int):
        self.depth += delta
        if self.depth > self.max_depth:
            self.max_depth = self.depth
        if self.max_depth > MAX_STACK:
            raise ValueError("expression too deep for the evaluation stack")

    def const(self, value: float) -> int:
        value = float(value)
        idx = self._const_index.get(value)
        if idx is None:
            idx = len(self.consts)
            self.consts.append(value)
            self._const_index[value] = idx
        return idx

    def emit_const(self, value: float):
        self.code += [OP_CONST, self.const(value)]
        self._push(1)

    def emit_x(self):
        self.code.append(OP_X)
        self._push(1)

    def emit_binary(self, op: int):
        self.code.append(op)
        self._push(-1)

    def emit_unary(self, op: int):
        self.code.append(op)

    def emit_pow(self, exponent: int):
        self.code += [OP_POW, int(exponent)]

    def emit_zero_in(self, lo: float, hi: float):
        self.code += [OP_ZERO_IN, self.const(lo), self.const(hi)]

    def finish(self) -> Program:
        if self.depth != 1:
            raise ValueError("malformed program: stack depth != 1 at end")
        return Program(
            np.asarray(self.code, dtype=np.int32),
            np.asarray(self.consts, dtype=np.float64),
            self.max_depth,
        )


_FUNC_OPS = {
    "exp": OP_EXP,
    "sin": OP_SIN,
    "cos": OP_COS,
    "abs": OP_ABS,
    "sqrt": OP_SQRT,
}

_BIN_OPS = {"+": OP_ADD, "-": OP_SUB, "*": OP_MUL, "/": OP_DIV}


def compile_expr(expr) -> Program:
    """Compile a fexpr AST to a program (post-order emission)."""
    # local import: fexpr imports this module for Program construction
    from . import fexpr as fx

    b = _Builder()

    def walk(node):
        if isinstance(node, fx.Const):
            b.emit_const(node.value)
        elif isinstance(node, fx.Var):
            b.emit_x()
        elif isinstance(node, fx.BinOp):
            walk(node.left)
            walk(node.right)
            b.emit_binary(_BIN_OPS[node.op])
        elif isinstance(node, fx.Neg):
            walk(node.operand)
            b.emit_unary(OP_NEG)
        elif isinstance(node, fx.Pow):
            walk(node.base)
            b.emit_pow(node.exponent)
        elif isinstance(node, fx.Call):
            walk(node.arg)
            b.emit_unary(_FUNC_OPS[node.func])
        else:  # pragma: no cover - parser only builds the kinds above
            raise TypeError(f"cannot compile node {node!r}")

    walk(expr)
    return b.finish()


def compile_polynomial(coeffs) -> Program:
    """Horner program for sum_i coeffs[i] x^i (coeffs in ascending powers)."""
    b = _Builder()
    cs = [float(c) for c in coeffs]
    if not cs:
        cs = [0.0]
    b.emit_const(cs[-1])
    for c in reversed(cs[:-1]):
        b.emit_x()
        b.emit_binary(OP_MUL)
        b.emit_const(c)
        b.emit_binary(OP_ADD)
    return b.finish()


def compile_exp_growth(a: float) -> Program:
    b = _Builder()
    b.emit_const(float(a))
    b.emit_x()
    b.emit_binary(OP_MUL)
    b.emit_unary(OP_EXP)
    return b.finish()


def wrap_zero_window(prog: Program, lo: float, hi: float) -> Program:
    """Force the value to exactly zero on the open interval (lo, hi)."""
    code = list(prog.code)
    consts = list(prog.consts)
    ilo, ihi = len(consts), len(consts) + 1
    consts += [float(lo), float(hi)]
    code += [OP_ZERO_IN, ilo, ihi]
    return Program(
        np.asarray(code, dtype=np.int32),
        np.asarray(consts, dtype=np.float64),
        prog.stack_need,
    )
