# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot kernels.

Mirrors szmd._kernels_py exactly; the opcode numbering below must match
szmd._program (checked by the backend-equivalence tests).
"""

from libc.math cimport INFINITY, M_PI, cos, exp, fabs, lgamma, log, log1p, sin, sqrt

import numpy as np

name = "compiled"

DEF OP_CONST = 0
DEF OP_X = 1
DEF OP_ADD = 2
DEF OP_SUB = 3
DEF OP_MUL = 4
DEF OP_DIV = 5
DEF OP_POW = 6
DEF OP_NEG = 7
DEF OP_EXP = 8
DEF OP_SIN = 9
DEF OP_COS = 10
DEF OP_ABS = 11
DEF OP_SQRT = 12
DEF OP_ZERO_IN = 13

DEF MAX_STACK = 64
DEF STIRLING_MIN = 16


cdef inline double _ipow(double base, int e) nogil:
    cdef double r = 1.0
    cdef double b = base
    cdef int k = e
    if k < 0:
        if base == 0.0:
            return INFINITY
        b = 1.0 / base
        k = -k
    while k > 0:
        if k & 1:
            r *= b
        b *= b
        k >>= 1
    return r


cdef inline double _stirling_tail(double k) nogil:
    cdef double r = 1.0 / (k * k)
    cdef double poly = 1.0 / 12.0 + r * (
        -1.0 / 360.0 + r * (1.0 / 1260.0 + r * (-1.0 / 1680.0 + r / 1188.0))
    )
    return poly / k


cdef inline double _log_pmf(double k, double lam) nogil:
    # ln(e^-lam lam^k / k!) for integer-valued k >= 0, lam > 0
    cdef double delta, core
    if k < STIRLING_MIN:
        if k == 0.0:
            return -lam
        return k * log(lam) - lgamma(k + 1.0) - lam
    delta = (lam - k) / k
    if fabs(delta) <= 0.5:
        core = k * log1p(delta)
    else:
        core = k * log(lam / k)
    return core + (k - lam) - 0.5 * log(2.0 * M_PI * k) - _stirling_tail(k)


cdef int _run_program(const int[::1] code, const double[::1] consts,
                      double t, double* stack) nogil:
    # returns the stack top index, or -1 on malformed input
    cdef Py_ssize_t i = 0, ncode = code.shape[0]
    cdef int sp = -1
    cdef int op
    cdef double lo, hi
    while i < ncode:
        op = code[i]
        if op == OP_CONST:
            sp += 1
            stack[sp] = consts[code[i + 1]]
            i += 2
        elif op == OP_X:
            sp += 1
            stack[sp] = t
            i += 1
        elif op == OP_ADD:
            stack[sp - 1] = stack[sp - 1] + stack[sp]
            sp -= 1
            i += 1
        elif op == OP_SUB:
            stack[sp - 1] = stack[sp - 1] - stack[sp]
            sp -= 1
            i += 1
        elif op == OP_MUL:
            stack[sp - 1] = stack[sp - 1] * stack[sp]
            sp -= 1
            i += 1
        elif op == OP_DIV:
            stack[sp - 1] = stack[sp - 1] / stack[sp]
            sp -= 1
            i += 1
        elif op == OP_POW:
            stack[sp] = _ipow(stack[sp], code[i + 1])
            i += 2
        elif op == OP_NEG:
            stack[sp] = -stack[sp]
            i += 1
        elif op == OP_EXP:
            stack[sp] = exp(stack[sp])
            i += 1
        elif op == OP_SIN:
            stack[sp] = sin(stack[sp])
            i += 1
        elif op == OP_COS:
            stack[sp] = cos(stack[sp])
            i += 1
        elif op == OP_ABS:
            stack[sp] = fabs(stack[sp])
            i += 1
        elif op == OP_SQRT:
            stack[sp] = sqrt(stack[sp])
            i += 1
        elif op == OP_ZERO_IN:
            lo = consts[code[i + 1]]
            hi = consts[code[i + 2]]
            if lo < t < hi:
                stack[sp] = 0.0
            i += 3
        else:
            return -1
    return sp


def eval_program(code, consts, t):
    """Run a stack program over an array of evaluation points."""
    cdef const int[::1] code_v = np.ascontiguousarray(code, dtype=np.int32)
    cdef const double[::1] consts_v = np.ascontiguousarray(consts, dtype=np.float64)
    t_arr = np.ascontiguousarray(t, dtype=np.float64)
    cdef const double[::1] t_v = t_arr.ravel()
    out = np.empty(t_v.shape[0], dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double stack[MAX_STACK]
    cdef Py_ssize_t i
    cdef int sp
    with nogil:
        for i in range(t_v.shape[0]):
            sp = _run_program(code_v, consts_v, t_v[i], stack)
            out_v[i] = stack[sp] if sp >= 0 else 0.0
    if sp < 0:
        raise ValueError("bad opcode in program")
    return out.reshape(np.shape(t))


def basis_window(double n, double x, Py_ssize_t k_lo, Py_ssize_t k_hi):
    """s_{n,k}(x) for k in [k_lo, k_hi], as probabilities (not logs)."""
    if k_hi < k_lo:
        return np.empty(0)
    out = np.empty(k_hi - k_lo + 1, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double lam = n * x
    cdef Py_ssize_t i
    if lam == 0.0:
        out[:] = 0.0
        if k_lo == 0:
            out[0] = 1.0
        return out
    with nogil:
        for i in range(out_v.shape[0]):
            out_v[i] = exp(_log_pmf(<double> (k_lo + i), lam))
    return out


def gamma_panel_values(code, consts, Py_ssize_t m, double n, edges, glx, glw):
    """Per-panel Gauss-Legendre values of the Gamma-weighted integral."""
    cdef const int[::1] code_v = np.ascontiguousarray(code, dtype=np.int32)
    cdef const double[::1] consts_v = np.ascontiguousarray(consts, dtype=np.float64)
    cdef const double[::1] edges_v = np.ascontiguousarray(edges, dtype=np.float64)
    cdef const double[::1] glx_v = np.ascontiguousarray(glx, dtype=np.float64)
    cdef const double[::1] glw_v = np.ascontiguousarray(glw, dtype=np.float64)
    cdef Py_ssize_t npanels = edges_v.shape[0] - 1
    out = np.empty(npanels, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef double stack[MAX_STACK]
    cdef double mf = <double> m
    cdef double a, b, half, mid, u, acc, fval
    cdef Py_ssize_t p, i
    cdef int sp = 0
    with nogil:
        for p in range(npanels):
            a = edges_v[p]
            b = edges_v[p + 1]
            half = 0.5 * (b - a)
            mid = 0.5 * (b + a)
            acc = 0.0
            for i in range(glx_v.shape[0]):
                u = mid + half * glx_v[i]
                sp = _run_program(code_v, consts_v, u / n, stack)
                if sp < 0:
                    break
                fval = stack[sp]
                acc += glw_v[i] * exp(_log_pmf(mf, u)) * fval
            out_v[p] = half * acc
    if sp < 0:
        raise ValueError("bad opcode in program")
    return out


def compensated_sum(values):
    """Neumaier compensated summation in the given order."""
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64)
    cdef double s = 0.0, comp = 0.0, t, x
    cdef Py_ssize_t i
    with nogil:
        for i in range(v.shape[0]):
            x = v[i]
            t = s + x
            if fabs(s) >= fabs(x):
                comp += (s - t) + x
            else:
                comp += (x - t) + s
            s = t
    return s + comp


def compensated_dot(a, b):
    """Neumaier compensated sum of the elementwise products a[i] * b[i]."""
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef double s = 0.0, comp = 0.0, t, x
    cdef Py_ssize_t i
    with nogil:
        for i in range(av.shape[0]):
            x = av[i] * bv[i]
            t = s + x
            if fabs(s) >= fabs(x):
                comp += (s - t) + x
            else:
                comp += (x - t) + s
            s = t
    return s + comp
