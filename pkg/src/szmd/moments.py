"""Closed-form moments and central moments of the operator family.

For index n > 0 and family parameter j, the image of the monomial e_r is

    sum_{k=0}^{r} n^-k C(r,k) (r-j)^(k-falling) x^{r-k}
        - n^-r e^{-nx} sum_{k=0}^{j-1-r} (nx)^k/k! (k+r-j)^(r-falling),

where the second (exponentially small) sum is empty for r >= j.  The central
moments split into a polynomial main part and an exponentially small tail that
vanishes identically for j <= 1.  Combinatorial factors are exact integers;
the exponential pieces are assembled from the log-space basis kernel.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, GrowthPreconditionError
from .numerics import binomial, falling_factorial, log_poisson_pmf

__all__ = [
    "CentralMomentSplit",
    "OperatorParams",
    "central_moment",
    "central_moment_bounds",
    "moment",
    "moment_correction",
]


def _check_x(x):
    if not (x >= 0 and math.isfinite(x)):
        raise DomainError(f"x must be a nonnegative finite real, got {x}")


@dataclass(frozen=True)
class OperatorParams:
    """One operator instance: real index n > 0 and integer family parameter j.

    n is accepted as any positive real; evaluation against a function of
    declared growth A additionally requires n > 2A (checked at use sites).
    """

    n: float
    j: int

    def __post_init__(self):
        if not self.n > 0 or math.isinf(self.n) or math.isnan(self.n):
            raise DomainError(f"n must be a positive finite real, got {self.n}")
        if not isinstance(self.j, int):
            raise DomainError(f"j must be an integer, got {self.j!r}")

    def require_growth(self, growth_a: float):
        if not self.n > 2.0 * growth_a:
            raise GrowthPreconditionError(self.n, growth_a)


@dataclass(frozen=True)
class CentralMomentSplit:
    """Central moment split into polynomial main part and exponential tail.

    total = main + tail; tail is identically zero for j <= 1 and has sign
    -(-1)^s for j >= 2.
    """

    main: float
    tail: float
    total: float


def moment_correction(params: OperatorParams, r: int, x: float) -> float:
    """The exponentially small part of the r-th moment (zero for r >= j):

    - n^-r e^{-nx} sum_{k=0}^{j-1-r} (nx)^k / k! * (k+r-j)^(r-falling)
    """
    n, j = params.n, params.j
    if r < 0:
        raise DomainError(f"moment order must be nonnegative, got {r}")
    _check_x(x)
    # e_0 is preserved exactly; the closed form below holds for r >= 1 only
    # (its falling factorial (k+r-j)^(r) does not vanish on j-r <= k < j
    # when r = 0).
    if r == 0 or j - 1 - r < 0:
        return 0.0
    lam = n * x
    terms = []
    for k in range(j - r):
        ff = falling_factorial(k + r - j, r)
        if ff:
            terms.append(math.exp(log_poisson_pmf(k, lam)) * ff)
    return -math.fsum(terms) / n ** r


def moment(params: OperatorParams, r: int, x: float) -> float:
    """The r-th moment (image of e_r) at x."""
    n, j = params.n, params.j
    if r < 0:
        raise DomainError(f"moment order must be nonnegative, got {r}")
    _check_x(x)
    if r == 0:
        return 1.0
    terms = []
    for k in range(r + 1):
        c = binomial(r, k) * falling_factorial(r - j, k)
        if c:
            terms.append(c * x ** (r - k) / n ** k)
    return math.fsum(terms) + moment_correction(params, r, x)


def central_moment(params: OperatorParams, s: int, x: float) -> CentralMomentSplit:
    """The s-th central moment at x, as its main + tail split.

    main = sum_{k=0}^{floor(s/2)} x^k/(k! n^{s-k}) s^(2k-falling) (s-k-j)^((s-2k)-falling)
    tail = - e^{-nx} sum_{r=1}^{s} C(s,r) (-x)^{s-r} n^-r
                     sum_{k=0}^{j-1-r} (nx)^k/k! (k+r-j)^(r-falling)
    """
    n, j = params.n, params.j
    if s < 0:
        raise DomainError(f"central-moment order must be nonnegative, got {s}")
    _check_x(x)
    if s == 0:
        return CentralMomentSplit(main=1.0, tail=0.0, total=1.0)

    main_terms = []
    for k in range(s // 2 + 1):
        c = falling_factorial(s, 2 * k) * falling_factorial(s - k - j, s - 2 * k)
        if c:
            main_terms.append(
                c * x ** k / (math.factorial(k) * n ** (s - k))
            )
    main = math.fsum(main_terms)

    tail = 0.0
    if j >= 2:
        lam = n * x
        tail_terms = []
        for r in range(1, s + 1):
            inner = []
            for k in range(j - r):
                ff = falling_factorial(k + r - j, r)
                if ff:
                    inner.append(math.exp(log_poisson_pmf(k, lam)) * ff)
            if inner:
                tail_terms.append(
                    math.comb(s, r) * (-x) ** (s - r) * math.fsum(inner) / n ** r
                )
        tail = -math.fsum(tail_terms)
    return CentralMomentSplit(main=main, tail=tail, total=main + tail)


def central_moment_bounds(params: OperatorParams, s: int, x: float):
    """Two-sided bounds (lower, upper) for the first or second central moment.

    For j <= 1 the moment is known exactly, so both slots hold the exact
    value; for j >= 2 the bounds are (1-j)/n <= . <= 0 at s = 1 and
    0 <= . <= 2x/n + (j-1)(j-2)/n^2 at s = 2.
    """
    n, j = params.n, params.j
    if s not in (1, 2):
        raise DomainError(f"bounds are available for s in {{1, 2}}, got {s}")
    _check_x(x)
    if s == 1:
        exact = (1 - j) / n
        if j >= 2:
            return (exact, 0.0)
        return (exact, exact)
    exact = 2.0 * x / n + (j - 1) * (j - 2) / n ** 2
    if j >= 2:
        return (0.0, exact)
    return (exact, exact)
