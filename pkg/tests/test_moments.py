"""Closed-form moments and central moments against exact-rational oracles."""

import math
from fractions import Fraction

import pytest

from szmd import (
    OperatorParams,
    central_moment,
    central_moment_bounds,
    falling_factorial,
    moment,
    moment_correction,
)
from szmd.errors import DomainError, GrowthPreconditionError


def rational_moment_parts(n: Fraction, j: int, r: int, x: Fraction):
    """(polynomial part, coefficient of e^{-nx}) of the r-th moment, exact.

    Independent re-derivation used as oracle: the moment equals
    part_poly + e^{-nx} * part_exp with both parts rational in (n, x).
    """
    if r == 0:
        return Fraction(1), Fraction(0)
    part_poly = sum(
        Fraction(math.comb(r, k) * falling_factorial(r - j, k)) * x ** (r - k) / n ** k
        for k in range(r + 1)
    )
    part_exp = -sum(
        (n * x) ** k / math.factorial(k) * falling_factorial(k + r - j, r)
        for k in range(max(0, j - r))
    ) / n ** r
    return part_poly, part_exp


def rational_central_via_binomial(n: Fraction, j: int, s: int, x: Fraction) -> float:
    """Binomial expansion sum_r C(s,r) (-x)^{s-r} moment_r, with the rational
    parts combined exactly and e^{-nx} applied once at the end."""
    poly_total = Fraction(0)
    exp_total = Fraction(0)
    for r in range(s + 1):
        part_poly, part_exp = rational_moment_parts(n, j, r, x)
        weight = Fraction(math.comb(s, r)) * (-x) ** (s - r)
        poly_total += weight * part_poly
        exp_total += weight * part_exp
    return float(poly_total) + math.exp(-float(n * x)) * float(exp_total)


class TestMoment:
    def test_constant_preserved(self):
        for j in (-3, 0, 2, 5):
            assert moment(OperatorParams(17.3, j), 0, 2.4) == 1.0

    def test_monomial_preserved_at_own_order(self):
        assert moment(OperatorParams(9.0, 3), 3, 1.5) == pytest.approx(3.375, rel=1e-15)
        for j in range(1, 6):
            for n in (5.0, 20.0, 100.0):
                for x in (0.25, 1.0, 3.0):
                    assert moment(OperatorParams(n, j), j, x) == pytest.approx(
                        x ** j, rel=1e-12
                    )

    def test_first_moment_classical(self):
        assert moment(OperatorParams(10.0, 0), 1, 2.0) == pytest.approx(2.1, rel=1e-15)

    def test_interpolation_at_zero_for_positive_j(self):
        assert moment(OperatorParams(10.0, 2), 1, 0.0) == 0.0
        for j in range(1, 6):
            for r in range(1, 7):
                assert moment(OperatorParams(7.0, j), r, 0.0) == pytest.approx(
                    0.0, abs=1e-15
                )

    def test_matches_rational_oracle(self):
        for j in range(-3, 7):
            for r in range(7):
                for n in (5, 20, 100):
                    for x_num in (0, 1, 4, 12):
                        x = Fraction(x_num, 4)
                        part_poly, part_exp = rational_moment_parts(
                            Fraction(n), j, r, x
                        )
                        want = float(part_poly) + math.exp(-n * float(x)) * float(
                            part_exp
                        )
                        got = moment(OperatorParams(float(n), j), r, float(x))
                        assert got == pytest.approx(want, rel=1e-13, abs=1e-15)

    def test_correction_empty_for_r_at_least_j(self):
        for j in range(-3, 6):
            for r in range(max(j, 0), 8):
                assert moment_correction(OperatorParams(10.0, j), r, 1.0) == 0.0

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            moment(OperatorParams(10.0, 0), -1, 1.0)
        with pytest.raises(DomainError):
            moment(OperatorParams(10.0, 0), 2, -1.0)
        with pytest.raises(DomainError):
            OperatorParams(0.0, 1)
        with pytest.raises(DomainError):
            OperatorParams(5.0, 1.5)  # j must be an integer

    def test_growth_precondition_guard(self):
        with pytest.raises(GrowthPreconditionError):
            OperatorParams(3.0, 0).require_growth(2.0)
        OperatorParams(5.0, 0).require_growth(2.0)


GRID_J = range(-3, 7)
GRID_S = range(9)
GRID_N = (5, 20, 100)
GRID_X = (Fraction(0), Fraction(1, 4), Fraction(1), Fraction(3))


class TestCentralMoment:
    def test_first_central_moment_value(self):
        split = central_moment(OperatorParams(20.0, 0), 1, 1.0)
        assert split.total == pytest.approx(0.05, rel=1e-15)

    def test_second_central_moment_value(self):
        split = central_moment(OperatorParams(10.0, 1), 2, 2.0)
        assert split.total == pytest.approx(0.4, rel=1e-15)
        assert split.tail == 0.0

    def test_interpolation_at_zero(self):
        split = central_moment(OperatorParams(5.0, 2), 1, 0.0)
        assert split.total == pytest.approx(0.0, abs=1e-15)

    def test_binomial_expansion_example(self):
        got = central_moment(OperatorParams(10.0, 3), 2, 1.0).total
        want = math.fsum(
            math.comb(2, r) * (-1.0) ** (2 - r) * moment(OperatorParams(10.0, 3), r, 1.0)
            for r in range(3)
        )
        assert got == pytest.approx(want, rel=1e-12)

    def test_total_is_exact_sum_of_parts(self):
        for j in GRID_J:
            for s in (1, 3, 6):
                split = central_moment(OperatorParams(20.0, j), s, 1.0)
                assert split.total == split.main + split.tail

    def test_matches_rational_binomial_oracle(self):
        for j in GRID_J:
            for s in GRID_S:
                for n in GRID_N:
                    for x in GRID_X:
                        want = rational_central_via_binomial(Fraction(n), j, s, x)
                        got = central_moment(OperatorParams(float(n), j), s, float(x))
                        if abs(want) < 1e-2:
                            assert got.total == pytest.approx(want, abs=1e-14)
                        else:
                            assert got.total == pytest.approx(want, rel=1e-12)

    def test_tail_identically_zero_for_small_j(self):
        for j in range(-3, 2):
            for s in GRID_S:
                for x in (0.0, 0.25, 1.0, 3.0):
                    assert central_moment(OperatorParams(20.0, j), s, x).tail == 0.0

    def test_tail_sign_for_large_j(self):
        # -(-1)^s tail >= 0 for j >= 2
        for j in range(2, 7):
            for s in range(1, 9):
                for x in (0.25, 1.0, 3.0):
                    tail = central_moment(OperatorParams(20.0, j), s, x).tail
                    assert (-1.0) ** s * tail <= 1e-18

    def test_totals_lie_within_bounds(self):
        for j in range(2, 7):
            for s in (1, 2):
                for n in GRID_N:
                    for x in (0.0, 0.25, 1.0, 3.0):
                        params = OperatorParams(float(n), j)
                        lo, hi = central_moment_bounds(params, s, x)
                        total = central_moment(params, s, x).total
                        assert lo - 1e-15 <= total <= hi + 1e-15


class TestCentralMomentBounds:
    def test_exact_for_small_j(self):
        assert central_moment_bounds(OperatorParams(10.0, 0), 1, 5.0) == (0.1, 0.1)

    def test_one_sided_for_large_j(self):
        lo, hi = central_moment_bounds(OperatorParams(10.0, 4), 1, 1.0)
        assert (lo, hi) == (-0.3, 0.0)
        lo, hi = central_moment_bounds(OperatorParams(10.0, 4), 2, 1.0)
        assert lo == 0.0
        assert hi == pytest.approx(0.26, rel=1e-15)

    def test_rejects_other_orders(self):
        with pytest.raises(DomainError):
            central_moment_bounds(OperatorParams(10.0, 2), 3, 1.0)
