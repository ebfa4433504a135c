"""Series + quadrature evaluation engine against closed-form oracles."""

import math

import pytest

from szmd import (
    OperatorParams,
    Polynomial,
    QuadratureConfig,
    evaluate,
    evaluate_batch,
    evaluate_derivative,
    excised_function,
    exp_growth_function,
    expression_function,
    inner_integral,
    log_basis,
    moment,
    polynomial_function,
    truncation_window,
)
from szmd.errors import (
    DomainError,
    GrowthPreconditionError,
    QuadratureConvergenceError,
)


def monomial(r):
    return polynomial_function(Polynomial.monomial(r))


def closed_form_exp_image(n, j, x, a):
    """Exact (S_{n,j} e^{at})(x) for any a < n: the inner integrals have the
    closed form (n/(n-a))^{m+1}, which collapses the series to an
    incomplete-sum expression in a rescaled basis.  Independent oracle for
    the general evaluation path, including the j >= 1 boundary terms."""
    head = math.fsum(math.exp(log_basis(n, k, x)) for k in range(max(j, 0)))
    lam2 = n * n / (n - a)
    head2 = math.fsum(math.exp(log_basis(lam2, k, x)) for k in range(max(j, 0)))
    return head + (n / (n - a)) ** (1 - j) * math.exp(a * n * x / (n - a)) * (
        1.0 - head2
    )


def closed_form_exp_decay(n, j, x):
    return closed_form_exp_image(n, j, x, -1.0)


class TestQuadratureConfig:
    def test_defaults(self):
        q = QuadratureConfig()
        assert (q.points_per_panel, q.rel_tol, q.max_panels) == (32, 1e-10, 64)

    @pytest.mark.parametrize(
        "kwargs",
        [dict(points_per_panel=1), dict(rel_tol=1.5), dict(rel_tol=0.0), dict(max_panels=0)],
    )
    def test_validation(self, kwargs):
        with pytest.raises(DomainError):
            QuadratureConfig(**kwargs)


class TestTruncationWindow:
    def test_window_captures_poisson_mass(self):
        for n, x in ((5.0, 0.25), (100.0, 3.0), (1000.0, 1.0)):
            w = truncation_window(n, x, 0.0, 1e-12)
            inside = math.fsum(
                math.exp(log_basis(n, k, x)) for k in range(w.k_lo, w.k_hi + 1)
            )
            assert inside >= 1.0 - 1e-12 - 1e-14
            assert w.k_lo <= n * x <= w.k_hi

    def test_growth_widens_window(self):
        plain = truncation_window(10.0, 2.0, 0.0, 1e-12)
        weighted = truncation_window(10.0, 2.0, 1.0, 1e-12)
        assert weighted.k_hi >= plain.k_hi


class TestInnerIntegral:
    def test_gamma_density_normalization(self):
        f = monomial(0)
        for n in (5.0, 50.0):
            for m in (0, 3, 17, 250, 4000):
                assert inner_integral(n, m, f) == pytest.approx(1.0, rel=1e-12)

    def test_first_moment_of_gamma(self):
        assert inner_integral(10.0, 4, monomial(1)) == pytest.approx(0.5, rel=1e-12)

    def test_exponential_closed_form(self):
        got = inner_integral(10.0, 3, exp_growth_function(2.0))
        assert got == pytest.approx((10.0 / 8.0) ** 4, rel=1e-12)

    def test_general_monomials(self):
        # E[(G/n)^r] = (m+1)(m+2)...(m+r)/n^r for G ~ Gamma(m+1)
        n, m = 7.0, 6
        for r in range(5):
            want = math.prod(range(m + 1, m + r + 1)) / n ** r
            assert inner_integral(n, m, monomial(r)) == pytest.approx(want, rel=1e-11)

    def test_precondition(self):
        with pytest.raises(GrowthPreconditionError):
            inner_integral(3.0, 2, exp_growth_function(2.0))
        with pytest.raises(DomainError):
            inner_integral(10.0, -1, monomial(0))

    def test_panel_budget_exhaustion_is_reported(self):
        f = expression_function("abs(x-1)", 1.0, 1.0)
        with pytest.raises(QuadratureConvergenceError):
            inner_integral(10.0, 8, f, QuadratureConfig(max_panels=2))


class TestEvaluate:
    def test_phillips_preserves_identity(self):
        r = evaluate(OperatorParams(50.0, 1), monomial(1), 2.0)
        assert r.value == 2.0
        assert r.truncation_error_bound == 0.0

    def test_classical_second_moment(self):
        r = evaluate(OperatorParams(10.0, 0), monomial(2), 1.0)
        assert r.value == pytest.approx(1.42, rel=1e-14)
        g = evaluate(OperatorParams(10.0, 0), monomial(2), 1.0, force_series=True)
        assert g.value == pytest.approx(1.42, rel=1e-8)
        assert g.terms_used > 0

    def test_interpolation_at_origin(self):
        f = expression_function("exp(-x)", 0.0, 1.0)
        assert evaluate(OperatorParams(20.0, 4), f, 0.0).value == 1.0
        assert evaluate(OperatorParams(20.0, 4), monomial(2), 0.0,
                        force_series=True).value == 0.0

    def test_origin_for_nonpositive_j_is_inner_integral(self):
        r = evaluate(OperatorParams(10.0, -3), monomial(2), 0.0, force_series=True)
        # moment at 0: n^-2 (2+3)(2+2) = 20/100
        assert r.value == pytest.approx(0.2, rel=1e-12)

    def test_growth_precondition(self):
        with pytest.raises(GrowthPreconditionError):
            evaluate(OperatorParams(3.0, 0), exp_growth_function(2.0), 1.0)

    def test_negative_x_rejected(self):
        with pytest.raises(DomainError):
            evaluate(OperatorParams(3.0, 0), monomial(1), -1.0)

    def test_series_matches_moments_on_sample_grid(self):
        for j in (-2, 0, 3, 5):
            for r in (0, 1, 4):
                f = monomial(r)
                for n in (5.0, 100.0):
                    p = OperatorParams(n, j)
                    for x in (0.25, 3.0):
                        closed = moment(p, r, x)
                        series = evaluate(p, f, x, force_series=True)
                        assert series.value == pytest.approx(
                            closed, rel=1e-8, abs=1e-12
                        )

    def test_series_matches_exponential_closed_form(self):
        f = expression_function("exp(-x)", 0.0, 1.0)
        for j in (-2, 0, 1, 4):
            for n in (10.0, 160.0, 2560.0):
                for x in (0.5, 2.0):
                    got = evaluate(OperatorParams(n, j), f, x)
                    want = closed_form_exp_decay(n, j, x)
                    assert got.value == pytest.approx(want, rel=1e-10)

    def test_constant_preservation_on_series_path(self):
        for j in (-3, 0, 2, 5):
            for n in (5.0, 100.0):
                for x in (0.25, 1.0, 3.0):
                    r = evaluate(OperatorParams(n, j), monomial(0), x,
                                 force_series=True)
                    assert r.value == pytest.approx(1.0, abs=1e-10)

    def test_positivity_up_to_truncation(self):
        nonneg = [
            monomial(2),
            expression_function("abs(x-1)", 1.0, 1.0),
            exp_growth_function(0.5),
            excised_function(polynomial_function([1]), 1.0, 0.3),
        ]
        for f in nonneg:
            for j in (-1, 0, 2):
                r = evaluate(OperatorParams(30.0, j), f, 1.0, force_series=True)
                assert r.value >= -r.truncation_error_bound

    def test_series_matches_growing_exponential_closed_form(self):
        # positive growth exercises the inflated truncation window and the
        # envelope bookkeeping
        for a in (0.5, 1.0):
            f = exp_growth_function(a)
            for j in (-2, 0, 1, 4):
                for n in (5.0, 20.0):
                    for x in (0.5, 2.0):
                        got = evaluate(OperatorParams(n, j), f, x)
                        want = closed_form_exp_image(n, j, x, a)
                        assert got.value == pytest.approx(want, rel=1e-9)

    def test_nonfinite_x_rejected(self):
        for bad in (math.inf, math.nan):
            with pytest.raises(DomainError):
                evaluate(OperatorParams(5.0, 0), monomial(1), bad)

    def test_growth_bound_of_exponential_images(self):
        for a in (0.5, 1.0):
            f = exp_growth_function(a)
            for j in (-2, 0, 1, 3):
                for n in (5.0, 20.0):
                    for x in (0.5, 2.0):
                        r = evaluate(OperatorParams(n, j), f, x)
                        bound = 1.0 + ((n - a) / n) ** (j - 1) * math.exp(
                            a * n * x / (n - a)
                        )
                        assert r.value <= bound + 10.0 * r.truncation_error_bound


class TestEvaluateDerivative:
    def test_order_zero_is_evaluate(self):
        f = expression_function("exp(-x)", 0.0, 1.0)
        p = OperatorParams(25.0, 1)
        assert evaluate_derivative(p, f, 1.0, 0).value == evaluate(p, f, 1.0).value

    def test_exact_derivative_of_moment_polynomial(self):
        r = evaluate_derivative(OperatorParams(10.0, 0), monomial(2), 1.0, 1)
        assert r.value == pytest.approx(2.4, rel=1e-14)

    def test_preserved_monomial_derivative(self):
        r = evaluate_derivative(OperatorParams(25.0, 2), monomial(2), 1.5, 1)
        assert r.value == pytest.approx(3.0, rel=1e-13)

    def test_second_derivative_of_cubic_is_exact(self):
        # image of e_3 at j=0: x^3 + 9x^2/n + 18x/n^2 + 6/n^3, so the second
        # derivative is 6x + 18/n
        n, x = 10.0, 1.3
        r = evaluate_derivative(OperatorParams(n, 0), monomial(3), x, 2)
        assert r.value == pytest.approx(6 * x + 18 / n, rel=1e-13)

    def test_second_derivative_matches_finite_difference(self):
        f = expression_function("exp(-x)", 0.0, 1.0)
        p = OperatorParams(40.0, 1)
        x, h = 1.0, 1e-4
        d2 = evaluate_derivative(p, f, x, 2).value
        fd = (
            evaluate(p, f, x + h).value
            - 2 * evaluate(p, f, x).value
            + evaluate(p, f, x - h).value
        ) / h ** 2
        assert d2 == pytest.approx(fd, rel=1e-4)

    def test_matches_finite_difference_on_smooth_functions(self):
        h = 1e-5
        for text in ("exp(-x)", "sin(x)"):
            f = expression_function(text, 0.0, 1.0)
            for j in (0, 2):
                for x in (0.5, 2.0):
                    p = OperatorParams(50.0, j)
                    d = evaluate_derivative(p, f, x, 1).value
                    fd = (
                        evaluate(p, f, x + h).value - evaluate(p, f, x - h).value
                    ) / (2 * h)
                    assert d == pytest.approx(fd, rel=1e-5)

    def test_negative_order_rejected(self):
        with pytest.raises(DomainError):
            evaluate_derivative(OperatorParams(10.0, 0), monomial(1), 1.0, -1)


def test_operator_is_linear_on_the_series_path():
    # S(a f + b g) = a S f + b S g, with all three images computed through
    # the full series + quadrature machinery
    f = expression_function("exp(-x)", 0.0, 1.0)
    g = expression_function("sin(x)", 0.0, 1.0)
    combo = expression_function("2.5*exp(-x) - 0.75*sin(x)", 0.0, 4.0)
    for j in (-1, 0, 2):
        for n, x in ((15.0, 0.5), (60.0, 2.0)):
            p = OperatorParams(n, j)
            lhs = evaluate(p, combo, x).value
            rhs = 2.5 * evaluate(p, f, x).value - 0.75 * evaluate(p, g, x).value
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


class TestEvaluateBatch:
    def test_matches_sequential_and_preserves_order(self):
        f = expression_function("exp(-x)", 0.0, 1.0)
        points = [(20.0, 1.0), (5.0, 0.25), (80.0, 2.0)]
        seq = [evaluate(OperatorParams(n, 2), f, x) for n, x in points]
        par = evaluate_batch(2, f, points, max_workers=4)
        assert [r.value for r in par] == [r.value for r in seq]
