"""Stable scalar kernels: log-space basis weights, exact combinatorics, and
certified Chernoff bounds for Poisson tails.

The basis weight s_{n,k}(x) = (nx)^k / k! * e^{-nx} is the Poisson(nx) mass at
k, and the Gamma quadrature weight e^{-u} u^m / m! is the same expression read
as a function of the mean, so a single log-pmf kernel serves both.  Everything
here is pure and reentrant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError

__all__ = [
    "BasisPoint",
    "TailBound",
    "falling_factorial",
    "binomial",
    "log_basis",
    "log_poisson_pmf",
    "poisson_head_bound",
    "poisson_tail_bound",
]

# lgamma(k+1) for k = 0..15; the direct log formula is well conditioned there.
_LOG_FACTORIAL = tuple(math.lgamma(k + 1) for k in range(16))

_STIRLING_MIN = 16

# Smallest positive subnormal; used to keep certified bounds strictly above
# an underflowed-to-zero value.
_TINY = 5e-324


def _stirling_tail(k: float) -> float:
    # lgamma(k+1) - (k ln k - k + 0.5 ln(2 pi k)); the next term of the
    # asymptotic series is ~ k^-11 < 1e-16 for k >= 16.
    r = 1.0 / (k * k)
    poly = 1.0 / 12.0 + r * (
        -1.0 / 360.0 + r * (1.0 / 1260.0 + r * (-1.0 / 1680.0 + r / 1188.0))
    )
    return poly / k


def log_poisson_pmf(k: int, lam: float) -> float:
    """ln of e^{-lam} lam^k / k!, stable for large k and lam.

    For k >= 16 the three large terms k ln(lam), lgamma(k+1) and lam are
    regrouped through Stirling's formula into k*log1p((lam-k)/k) + (k - lam)
    plus small corrections, which avoids the catastrophic cancellation of the
    direct formula.  Returns -inf at lam = 0, k > 0 and 0.0 at lam = 0, k = 0.
    """
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    if lam < 0.0 or math.isnan(lam):
        raise DomainError(f"lam must be nonnegative, got {lam}")
    if lam == 0.0:
        return 0.0 if k == 0 else -math.inf
    kf = float(k)
    if k < _STIRLING_MIN:
        return kf * math.log(lam) - _LOG_FACTORIAL[k] - lam
    delta = (lam - kf) / kf
    if abs(delta) <= 0.5:
        core = kf * math.log1p(delta)
    else:
        core = kf * math.log(lam / kf)
    return core + (kf - lam) - 0.5 * math.log(2.0 * math.pi * kf) - _stirling_tail(kf)


def log_basis(n: float, k: int, x: float) -> float:
    """ln s_{n,k}(x) with s_{n,k}(x) = (nx)^k / k! * e^{-nx}.

    Exactly -inf at (x = 0, k > 0) and 0.0 at (x = 0, k = 0).
    """
    if not n > 0.0 or math.isinf(n):
        raise DomainError(f"n must be a positive finite real, got {n}")
    if x < 0.0 or math.isnan(x):
        raise DomainError(f"x must be nonnegative, got {x}")
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    return log_poisson_pmf(k, n * x)


@dataclass(frozen=True)
class BasisPoint:
    """A validated (n, k, x) triple for basis evaluation.

    n is real-valued (not just integer) so preconditions like n > 2A can be
    exercised on a continuum.
    """

    n: float
    k: int
    x: float

    def __post_init__(self):
        if not self.n > 0.0:
            raise DomainError(f"n must be positive, got {self.n}")
        if self.k < 0:
            raise DomainError(f"k must be nonnegative, got {self.k}")
        if self.x < 0.0:
            raise DomainError(f"x must be nonnegative, got {self.x}")

    def log_value(self) -> float:
        return log_basis(self.n, self.k, self.x)


def falling_factorial(a: int, k: int) -> int:
    """a (a-1) ... (a-k+1): exact integer, 1 for k = 0, 0 for 0 <= a < k."""
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    result = 1
    for i in range(k):
        result *= a - i
    return result


def binomial(a: int, k: int) -> int:
    """Generalized binomial coefficient C(a, k) for integer a of either sign.

    Equals falling_factorial(a, k) / k!, which is an exact integer; zero for
    k < 0 by convention.
    """
    if k < 0:
        return 0
    # the product of k consecutive integers is divisible by k!
    return falling_factorial(a, k) // math.factorial(k)


def _chernoff(lam: float, cutoff: int) -> float:
    # exp(-lam) * (e*lam/K)^K evaluated in log space; valid as an upper bound
    # on the upper tail for K > lam and on the lower tail for K < lam.
    if cutoff == 0:
        log_bound = -lam
    else:
        kf = float(cutoff)
        log_bound = -lam + kf * (1.0 + math.log(lam) - math.log(kf))
    return max(math.exp(log_bound), _TINY)


def poisson_tail_bound(lam: float, cutoff: int) -> float:
    """Certified upper bound on P(Poisson(lam) > cutoff).

    Chernoff bound exp(-lam) (e lam / K)^K for K > lam, trivial bound 1
    otherwise; monotone nonincreasing in the cutoff beyond ceil(lam).  The
    result is clamped to the smallest positive subnormal so that an
    underflowed bound still dominates the (even smaller) exact tail.
    """
    if not lam > 0.0 or math.isinf(lam):
        raise DomainError(f"lam must be a positive finite real, got {lam}")
    if cutoff < 0:
        return 1.0
    if cutoff <= lam:
        return 1.0
    return _chernoff(lam, cutoff)


def poisson_head_bound(lam: float, cutoff: int) -> float:
    """Certified upper bound on P(Poisson(lam) <= cutoff), the mirror of
    :func:`poisson_tail_bound` (the same Chernoff expression bounds the lower
    tail for cutoff < lam).  Returns 0 for cutoff < 0 and 1 for cutoff >= lam.
    """
    if not lam > 0.0 or math.isinf(lam):
        raise DomainError(f"lam must be a positive finite real, got {lam}")
    if cutoff < 0:
        return 0.0
    if cutoff >= lam:
        return 1.0
    return _chernoff(lam, cutoff)


@dataclass(frozen=True)
class TailBound:
    """A certified Poisson tail record: bound >= P(Poisson(lam) > cutoff)."""

    lam: float
    cutoff: int
    bound: float

    @classmethod
    def upper(cls, lam: float, cutoff: int) -> "TailBound":
        return cls(lam, cutoff, poisson_tail_bound(lam, cutoff))
