"""Empirical verification harness: rate-of-convergence tables against the
modulus bound, asymptotic-order fits, and localization decay probes.

Each experiment produces an ExperimentReport: rows of (n, value, reference,
error, bound) sorted by n, an optional least-squares fit, and a pass/fail
verdict.  Reports serialize to CSV (the row table) and JSON (the full record).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .diffop import expansion_coefficient
from .errors import DegenerateFitError, DomainError
from .fexpr import FunctionSpec, excised_function
from .operators import EvalResult, QuadratureConfig, evaluate_batch

__all__ = [
    "ExperimentReport",
    "FitResult",
    "ModulusEstimate",
    "ReportRow",
    "converge_report",
    "estimate_modulus",
    "geometric_grid",
    "localization_probe",
    "order_fit",
    "voronovskaja_fit",
]


@dataclass(frozen=True)
class ModulusEstimate:
    """Grid estimate of the modulus of continuity w(f, delta) on a window.

    A lower bound of the true modulus that converges from below as the grid
    refines, and nondecreasing in delta on a fixed grid.
    """

    delta: float
    window: tuple[float, float]
    value: float
    grid_points: int


@dataclass(frozen=True)
class ReportRow:
    n: float
    value: float
    reference: float
    error: float
    bound: float | None = None


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True)
class ExperimentReport:
    """Rows sorted by n ascending, an optional fit, and a verdict.

    For localization probes the fitted line is ln(value) against n itself and
    decay_constant = -slope; for order fits it is ln(error) against ln(n).
    """

    rows: tuple[ReportRow, ...]
    fit: FitResult | None
    verdict: bool
    note: str = ""
    decay_constant: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "rows": [
                {
                    "n": r.n,
                    "value": r.value,
                    "reference": r.reference,
                    "error": r.error,
                    "bound": r.bound,
                }
                for r in self.rows
            ],
            "fit": None
            if self.fit is None
            else {
                "slope": self.fit.slope,
                "intercept": self.fit.intercept,
                "r_squared": self.fit.r_squared,
            },
            "verdict": "pass" if self.verdict else "fail",
            "note": self.note,
            "decay_constant": self.decay_constant,
        }

    def write_csv(self, stream, float_format=None) -> None:
        fmt = float_format or (lambda v: format(v, ".12g"))
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["n", "value", "reference", "error", "bound"])
        for r in self.rows:
            writer.writerow(
                [
                    fmt(r.n),
                    fmt(r.value),
                    fmt(r.reference),
                    fmt(r.error),
                    "" if r.bound is None else fmt(r.bound),
                ]
            )


def geometric_grid(start: float, factor: float, count: int) -> list[float]:
    """[start * factor^i for i in 0..count-1]."""
    if count < 1 or not start > 0 or not factor > 0:
        raise DomainError("grid needs start > 0, factor > 0, count >= 1")
    return [start * factor ** i for i in range(count)]


def estimate_modulus(
    f: FunctionSpec, delta: float, window: tuple[float, float], grid_points: int
) -> ModulusEstimate:
    """max |f(t1) - f(t2)| over grid pairs with |t1 - t2| <= delta."""
    lo, hi = float(window[0]), float(window[1])
    if not delta > 0:
        raise DomainError(f"delta must be positive, got {delta}")
    if lo < 0 or not hi > lo:
        raise DomainError(f"window must be a nonempty interval in [0, inf), got {window}")
    if grid_points < 100:
        raise DomainError(f"grid_points must be at least 100, got {grid_points}")
    grid = np.linspace(lo, hi, grid_points)
    vals = f.values(grid)
    h = (hi - lo) / (grid_points - 1)
    max_shift = min(grid_points - 1, int(delta / h + 1e-12))
    best = 0.0
    for s in range(1, max_shift + 1):
        best = max(best, float(np.max(np.abs(vals[s:] - vals[:-s]))))
    return ModulusEstimate(delta, (lo, hi), best, grid_points)


def _linear_fit(xs, ys) -> FitResult:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    slope, intercept = np.polyfit(xs, ys, 1)
    resid = ys - (slope * xs + intercept)
    ss_res = float(np.sum(resid ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    if ss_tot <= 1e-300:
        r2 = 1.0 if ss_res <= 1e-300 else 0.0
    else:
        r2 = max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return FitResult(float(slope), float(intercept), r2)


def order_fit(rows) -> FitResult:
    """Least-squares line of ln(error) against ln(n); -slope estimates the
    convergence order q in O(n^-q)."""
    pts = [(float(n), float(e)) for n, e in rows]
    if len(pts) < 4:
        raise DegenerateFitError(f"order fit needs at least 4 rows, got {len(pts)}")
    if any(e <= 0 for _, e in pts):
        raise DegenerateFitError("order fit needs strictly positive errors")
    return _linear_fit([math.log(n) for n, _ in pts], [math.log(e) for _, e in pts])


def _noise_floor(ev: EvalResult, rel_tol: float) -> float:
    # quadrature noise scales with rel_tol on the series path; the closed-form
    # fast path (terms_used == 0) only carries rounding noise
    if ev.terms_used > 0:
        quad = rel_tol * (abs(ev.value) + 1.0)
    else:
        quad = 1e-15 * (abs(ev.value) + 1.0)
    return 10.0 * (ev.truncation_error_bound + quad)


def converge_report(
    f: FunctionSpec,
    j: int,
    x: float,
    n_grid,
    *,
    q: QuadratureConfig | None = None,
    tail_tol: float = 1e-12,
    window: tuple[float, float] | None = None,
    modulus_divisions: int = 25,
    max_workers: int | None = None,
) -> ExperimentReport:
    """Convergence table checked against the modulus-of-continuity bound

        |(S_{n,j} f)(x) - f(x)| <= (1 + sqrt(2x + (j-1)(j-2)/n)) w(f, 1/sqrt(n)).

    The verdict passes when every row satisfies
    error <= bound (1 + 1e-6) + 10 * truncation_error_bound.
    """
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    ns = sorted(float(n) for n in n_grid)
    if q is None:
        q = QuadratureConfig()
    results = evaluate_batch(j, f, [(n, x) for n in ns], q, tail_tol, max_workers)
    reference = f.value(x)

    if window is None:
        window = (max(0.0, x - 8.0), x + 8.0 + 4.0 / math.sqrt(ns[0]))
    delta_min = 1.0 / math.sqrt(ns[-1])
    grid_points = int((window[1] - window[0]) / (delta_min / modulus_divisions)) + 2
    grid_points = max(100, min(grid_points, 200_000))

    rows = []
    ok = True
    for n, ev in zip(ns, results):
        delta = 1.0 / math.sqrt(n)
        om = estimate_modulus(f, delta, window, grid_points).value
        bound = (1.0 + math.sqrt(2.0 * x + (j - 1) * (j - 2) / n)) * om
        error = abs(ev.value - reference)
        rows.append(ReportRow(n, ev.value, reference, error, bound))
        if error > bound * (1.0 + 1e-6) + 10.0 * ev.truncation_error_bound:
            ok = False

    positive = [(r.n, r.error) for r in rows if r.error > 0]
    fit = order_fit(positive) if len(positive) >= 4 else None
    return ExperimentReport(tuple(rows), fit, ok)


def voronovskaja_fit(
    f: FunctionSpec,
    j: int,
    x: float,
    expansion_order: int,
    n_grid,
    *,
    q: QuadratureConfig | None = None,
    tail_tol: float = 1e-12,
    stabilization_rtol: float = 0.05,
    max_workers: int | None = None,
) -> ExperimentReport:
    """Remainder-order fit for the truncated asymptotic expansion.

    Row n holds the remainder R(n) = (S_{n,j} f)(x) - sum_{k<=q} c_k n^-k.
    Rows within the noise floor (truncation + quadrature) are excluded from
    the fit.  Verdict: fitted slope <= -(q+1) + 0.2, and n^{q+1} R(n) at the
    largest reliable n matches the next coefficient c_{q+1} to
    ``stabilization_rtol`` (skipped when c_{q+1} = 0).  If every remainder
    sits at the noise floor the expansion is exact at solver precision and
    the verdict passes.
    """
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    if expansion_order < 0:
        raise DomainError("expansion order must be nonnegative")
    ns = sorted(float(n) for n in n_grid)
    if q is None:
        q = QuadratureConfig()

    derivs = f.derivatives_at(x, 2 * (expansion_order + 1))
    coeffs = [
        float(
            expansion_coefficient(j, k, derivs[k : 2 * k + 1], x).value
        )
        for k in range(expansion_order + 2)
    ]
    results = evaluate_batch(j, f, [(n, x) for n in ns], q, tail_tol, max_workers)

    rows = []
    kept = []  # (n, signed remainder)
    for n, ev in zip(ns, results):
        partial = math.fsum(
            coeffs[k] * n ** (-k) for k in range(expansion_order + 1)
        )
        remainder = ev.value - partial
        rows.append(ReportRow(n, ev.value, partial, abs(remainder)))
        if abs(remainder) > _noise_floor(ev, q.rel_tol):
            kept.append((n, remainder))

    if not kept:
        return ExperimentReport(
            tuple(rows), None, True, note="remainder at solver floor"
        )
    if len(kept) < 4:
        return ExperimentReport(
            tuple(rows), None, False, note="too few rows above the noise floor"
        )

    fit = order_fit([(n, abs(r)) for n, r in kept])
    slope_ok = fit.slope <= -(expansion_order + 1) + 0.2
    stab_ok = True
    c_next = coeffs[expansion_order + 1]
    if abs(c_next) > 1e-300:
        n_big, r_big = kept[-1]
        estimate = n_big ** (expansion_order + 1) * r_big
        stab_ok = abs(estimate - c_next) <= stabilization_rtol * abs(c_next)
    return ExperimentReport(tuple(rows), fit, slope_ok and stab_ok)


def localization_probe(
    g: FunctionSpec,
    x: float,
    delta: float,
    j: int,
    n_grid,
    *,
    q: QuadratureConfig | None = None,
    tail_tol: float = 1e-12,
    max_workers: int | None = None,
) -> ExperimentReport:
    """Exponential-decay probe for functions vanishing near x.

    The probe builds f = g excised on (x-delta, x+delta) and fits ln |(S f)(x)|
    against n (not ln n).  Verdict: negative slope with r^2 >= 0.99 over the
    rows above the noise floor; if every row is at the floor the image has
    decayed below measurement and the probe passes.  decay_constant = -slope.
    """
    if not x > 0:
        raise DomainError(f"x must be positive, got {x}")
    ns = sorted(float(n) for n in n_grid)
    if q is None:
        q = QuadratureConfig()
    f = excised_function(g, x, delta)
    results = evaluate_batch(j, f, [(n, x) for n in ns], q, tail_tol, max_workers)

    rows = []
    kept = []
    for n, ev in zip(ns, results):
        magnitude = abs(ev.value)
        rows.append(ReportRow(n, magnitude, 0.0, magnitude))
        if magnitude > _noise_floor(ev, q.rel_tol):
            kept.append((n, magnitude))

    if not kept:
        return ExperimentReport(
            tuple(rows), None, True, note="decayed below truncation floor"
        )
    if len(kept) < 4:
        return ExperimentReport(
            tuple(rows), None, False, note="too few rows above the noise floor"
        )
    fit = _linear_fit([n for n, _ in kept], [math.log(v) for _, v in kept])
    verdict = fit.slope < 0 and fit.r_squared >= 0.99
    return ExperimentReport(
        tuple(rows), fit, verdict, decay_constant=-fit.slope
    )
