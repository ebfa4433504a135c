"""Exact polynomial calculus and the family of differential operators behind
the asymptotic expansions.

The second-order operator for family parameter j acts on a function p as

    (1 - j) p'(x) + x p''(x),

its k-th iterate sends the monomial e_r = x^r to r^(k-falling) (r-j)^(k-falling)
e_{r-k}, and the expansion coefficients of order k are 1/k! times the iterate.
All polynomial arithmetic is over exact rationals; floats appear only when a
coefficient is finally evaluated at a numeric point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import ArityError, DomainError
from .numerics import binomial, falling_factorial

__all__ = [
    "ExpansionTerm",
    "Polynomial",
    "apply_dj2",
    "apply_dj2k",
    "differentiate_poly",
    "expansion_coefficient",
    "expansion_coefficient_poly",
    "simultaneous_coefficient",
]


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        # exact binary value of the float
        return Fraction(value)
    raise DomainError(f"cannot use {value!r} as an exact coefficient")


@dataclass(frozen=True)
class Polynomial:
    """Dense polynomial over exact rationals; coeffs[i] multiplies x^i.

    Trailing zeros are trimmed, the zero polynomial has an empty coefficient
    tuple and degree -1.
    """

    coeffs: tuple[Fraction, ...] = field(default=())

    def __post_init__(self):
        cs = tuple(_as_fraction(c) for c in self.coeffs)
        while cs and cs[-1] == 0:
            cs = cs[:-1]
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def monomial(cls, r: int, coeff=1) -> "Polynomial":
        if r < 0:
            raise DomainError(f"monomial power must be nonnegative, got {r}")
        return cls((0,) * r + (coeff,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __add__(self, other: "Polynomial") -> "Polynomial":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return Polynomial(tuple(out))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1)

    def scale(self, factor) -> "Polynomial":
        f = _as_fraction(factor)
        return Polynomial(tuple(c * f for c in self.coeffs))

    def shift_up(self, powers: int = 1) -> "Polynomial":
        """Multiply by x^powers."""
        if self.is_zero():
            return self
        return Polynomial((Fraction(0),) * powers + self.coeffs)

    def derivative(self, times: int = 1) -> "Polynomial":
        if times < 0:
            raise DomainError(f"derivative order must be nonnegative, got {times}")
        cs = self.coeffs
        for _ in range(times):
            cs = tuple(cs[i] * i for i in range(1, len(cs)))
        return Polynomial(cs)

    def evaluate(self, t):
        """Horner evaluation; exact for Fraction arguments, float otherwise."""
        result = 0 * t
        for c in reversed(self.coeffs):
            result = result * t + c
        return result

    def __call__(self, t):
        return self.evaluate(t)


@dataclass(frozen=True)
class ExpansionTerm:
    """One asymptotic-expansion coefficient: ``value`` multiplies n^-order.

    derivative_order m > 0 marks coefficients of the expansion of the m-th
    derivative of the operator image.
    """

    order: int
    value: float
    derivative_order: int = 0


def differentiate_poly(p: Polynomial, times: int = 1) -> Polynomial:
    """Exact ``times``-fold derivative."""
    return p.derivative(times)


def apply_dj2(j: int, p: Polynomial) -> Polynomial:
    """(1 - j) p' + x p'', exactly."""
    dp = p.derivative()
    return dp.scale(1 - j) + dp.derivative().shift_up()


def apply_dj2k(j: int, k: int, p: Polynomial) -> Polynomial:
    """k-th iterate of :func:`apply_dj2`; the identity for k = 0.

    On monomials it realizes the closed form
    e_r -> r^(k-falling) (r-j)^(k-falling) e_{r-k}.
    """
    if k < 0:
        raise DomainError(f"iterate order must be nonnegative, got {k}")
    out = p
    for _ in range(k):
        out = apply_dj2(j, out)
    return out


def expansion_coefficient_poly(j: int, k: int, p: Polynomial) -> Polynomial:
    """The order-k expansion coefficient of a polynomial input, as a
    polynomial in x: apply_dj2k(j, k, p) / k!."""
    return apply_dj2k(j, k, p).scale(Fraction(1, math.factorial(k)))


def expansion_coefficient(j: int, k: int, derivs: Sequence, x) -> ExpansionTerm:
    """Order-k expansion coefficient from point derivatives.

    ``derivs`` must hold f^(k+s)(x) for s = 0..k; the value is

        sum_{s=0}^{k} f^(k+s)(x) / s! * C(k-j, k-s) * x^s.

    Arithmetic is duck-typed: exact inputs (Fraction) give an exact value.
    """
    if k < 0:
        raise DomainError(f"order must be nonnegative, got {k}")
    if len(derivs) != k + 1:
        raise ArityError(
            f"need {k + 1} derivatives f^(k)..f^(2k), got {len(derivs)}"
        )
    total = 0
    for s in range(k + 1):
        c = binomial(k - j, k - s)
        if c:
            term = derivs[s] * c
            if s:
                term = term * x ** s
                term = term / math.factorial(s)
            total = total + term
    return ExpansionTerm(order=k, value=total)


def simultaneous_coefficient(j: int, k: int, m: int, derivs: Sequence, x) -> ExpansionTerm:
    """Order-k coefficient of the expansion of the m-th derivative.

    ``derivs`` must hold f^(k+m+i)(x) for i = 0..k; the value is

        1/k! * sum_{i=0}^{k} C(k,i) (k+m-j)^((k-i)-falling) x^i f^(k+m+i)(x),

    which for m = 0 coincides with :func:`expansion_coefficient` and in
    general equals the m-th x-derivative of the order-k coefficient.
    """
    if k < 0 or m < 0:
        raise DomainError("order and derivative order must be nonnegative")
    if len(derivs) != k + 1:
        raise ArityError(
            f"need {k + 1} derivatives f^(k+m)..f^(2k+m), got {len(derivs)}"
        )
    total = 0
    for i in range(k + 1):
        c = math.comb(k, i) * falling_factorial(k + m - j, k - i)
        if c:
            term = derivs[i] * c
            if i:
                term = term * x ** i
            total = total + term
    return ExpansionTerm(
        order=k, value=total / math.factorial(k), derivative_order=m
    )
