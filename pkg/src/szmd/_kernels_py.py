"""Pure NumPy implementation of the hot kernels.

This is the fallback when the compiled extension (szmd._kernels) is not
available, and the reference its results are compared against.  The two
backends expose the same four entry points:

    eval_program(code, consts, t)            -> ndarray
    basis_window(n, x, k_lo, k_hi)           -> ndarray of s_{n,k}(x)
    gamma_panel_values(code, consts, m, n, edges, glx, glw) -> ndarray
    compensated_dot(a, b) / compensated_sum(a)              -> float
"""

from __future__ import annotations

import math

import numpy as np

from ._program import (
    OP_ABS,
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_DIV,
    OP_EXP,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_SIN,
    OP_SQRT,
    OP_SUB,
    OP_X,
    OP_ZERO_IN,
)

name = "python"

_LOG_FACTORIAL = np.array([math.lgamma(k + 1) for k in range(16)])
_STIRLING_MIN = 16


def eval_program(code, consts, t):
    """Run a stack program over an array of evaluation points."""
    t = np.asarray(t, dtype=np.float64)
    stack = []
    i = 0
    ncode = len(code)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        while i < ncode:
            op = code[i]
            if op == OP_CONST:
                stack.append(np.full(t.shape, consts[code[i + 1]]))
                i += 2
            elif op == OP_X:
                stack.append(t)
                i += 1
            elif op == OP_ADD:
                b = stack.pop()
                stack[-1] = stack[-1] + b
                i += 1
            elif op == OP_SUB:
                b = stack.pop()
                stack[-1] = stack[-1] - b
                i += 1
            elif op == OP_MUL:
                b = stack.pop()
                stack[-1] = stack[-1] * b
                i += 1
            elif op == OP_DIV:
                b = stack.pop()
                stack[-1] = stack[-1] / b
                i += 1
            elif op == OP_POW:
                e = int(code[i + 1])
                stack[-1] = stack[-1] ** float(e) if e < 0 else stack[-1] ** e
                i += 2
            elif op == OP_NEG:
                stack[-1] = -stack[-1]
                i += 1
            elif op == OP_EXP:
                stack[-1] = np.exp(stack[-1])
                i += 1
            elif op == OP_SIN:
                stack[-1] = np.sin(stack[-1])
                i += 1
            elif op == OP_COS:
                stack[-1] = np.cos(stack[-1])
                i += 1
            elif op == OP_ABS:
                stack[-1] = np.abs(stack[-1])
                i += 1
            elif op == OP_SQRT:
                stack[-1] = np.sqrt(stack[-1])
                i += 1
            elif op == OP_ZERO_IN:
                lo = consts[code[i + 1]]
                hi = consts[code[i + 2]]
                stack[-1] = np.where((t > lo) & (t < hi), 0.0, stack[-1])
                i += 3
            else:  # pragma: no cover
                raise ValueError(f"bad opcode {op}")
    return np.array(stack[-1], dtype=np.float64, copy=True)


def _log_pmf_fixed_lam(k, lam):
    # ln(e^-lam lam^k / k!) for an integer array k and scalar mean lam > 0.
    k = np.asarray(k, dtype=np.float64)
    out = np.empty_like(k)
    small = k < _STIRLING_MIN
    if small.any():
        ks = k[small]
        out[small] = ks * math.log(lam) - _LOG_FACTORIAL[ks.astype(np.intp)] - lam
    big = ~small
    if big.any():
        kb = k[big]
        delta = (lam - kb) / kb
        with np.errstate(divide="ignore"):
            core = np.where(
                np.abs(delta) <= 0.5,
                kb * np.log1p(np.where(np.abs(delta) <= 0.5, delta, 0.0)),
                kb * np.log(lam / kb),
            )
        r = 1.0 / (kb * kb)
        tail = (
            1.0 / 12.0
            + r * (-1.0 / 360.0 + r * (1.0 / 1260.0 + r * (-1.0 / 1680.0 + r / 1188.0)))
        ) / kb
        out[big] = core + (kb - lam) - 0.5 * np.log(2.0 * np.pi * kb) - tail
    return out


def _log_pmf_fixed_k(m, u):
    # ln(e^-u u^m / m!) for scalar integer m >= 0 and an array of means u > 0.
    u = np.asarray(u, dtype=np.float64)
    if m < _STIRLING_MIN:
        if m == 0:
            return -u
        return m * np.log(u) - _LOG_FACTORIAL[m] - u
    mf = float(m)
    delta = (u - mf) / mf
    core = np.where(
        np.abs(delta) <= 0.5,
        mf * np.log1p(np.where(np.abs(delta) <= 0.5, delta, 0.0)),
        mf * np.log(u / mf),
    )
    r = 1.0 / (mf * mf)
    tail = (
        1.0 / 12.0
        + r * (-1.0 / 360.0 + r * (1.0 / 1260.0 + r * (-1.0 / 1680.0 + r / 1188.0)))
    ) / mf
    return core + (mf - u) - 0.5 * math.log(2.0 * math.pi * mf) - tail


def basis_window(n, x, k_lo, k_hi):
    """s_{n,k}(x) for k in [k_lo, k_hi], as probabilities (not logs)."""
    if k_hi < k_lo:
        return np.empty(0)
    lam = n * x
    k = np.arange(k_lo, k_hi + 1)
    if lam == 0.0:
        out = np.zeros(len(k))
        if k_lo == 0:
            out[0] = 1.0
        return out
    return np.exp(_log_pmf_fixed_lam(k, lam))


def gamma_panel_values(code, consts, m, n, edges, glx, glw):
    """Per-panel Gauss-Legendre values of the Gamma-weighted integral.

    Panel p covers [edges[p], edges[p+1]] and contributes
    integral of e^{-u} u^m / m! * f(u/n) du, with f given as a program.
    """
    edges = np.asarray(edges, dtype=np.float64)
    a = edges[:-1]
    b = edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    u = mid[:, None] + half[:, None] * glx[None, :]
    logw = _log_pmf_fixed_k(m, u)
    fvals = eval_program(code, consts, (u / n).ravel()).reshape(u.shape)
    return half * np.sum(glw[None, :] * np.exp(logw) * fvals, axis=1)


def compensated_sum(values) -> float:
    """Error-free summation (math.fsum) in the given order."""
    return math.fsum(np.asarray(values, dtype=np.float64).tolist())


def compensated_dot(a, b) -> float:
    """Error-free sum of the elementwise products a[i] * b[i]."""
    prod = np.asarray(a, dtype=np.float64) * np.asarray(b, dtype=np.float64)
    return math.fsum(prod.tolist())
