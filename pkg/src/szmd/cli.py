"""Command-line workbench: operator evaluation, moment calculus, expansion
coefficients, and the experiment reports, emitted as JSON or CSV.

Numeric output is rendered with 17 significant digits in JSON and 12 in CSV;
identical invocations produce byte-identical documents.  Exit codes: 0 on
success, 1 for domain/precondition errors (structured JSON on stderr), 2 for
usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from .diffop import Polynomial, expansion_coefficient, simultaneous_coefficient
from .errors import GrowthPreconditionError, SzmdError
from .experiments import (
    converge_report,
    localization_probe,
    voronovskaja_fit,
)
from .fexpr import (
    exp_growth_function,
    expression_function,
    polynomial_function,
)
from .moments import OperatorParams, central_moment, moment
from .operators import QuadratureConfig, evaluate, evaluate_derivative

__all__ = ["main", "run"]


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _json_render(obj) -> str:
    if obj is None:
        return "null"
    if obj is True:
        return "true"
    if obj is False:
        return "false"
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return "null"
        return format(obj, ".17g")
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        inner = ", ".join(
            f"{json.dumps(str(k))}: {_json_render(v)}" for k, v in obj.items()
        )
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_render(v) for v in obj) + "]"
    raise TypeError(f"cannot render {type(obj)!r} as JSON")


def _csv_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return format(v, ".12g")
    return str(v)


def _scalar_csv(doc: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(doc.keys()))
    writer.writerow([_csv_value(v) for v in doc.values()])
    return buf.getvalue()


def _parse_function(text: str, growth_a: float, growth_k: float):
    if text.startswith("poly:"):
        coeffs = [c.strip() for c in text[len("poly:"):].split(",") if c.strip()]
        if not coeffs:
            raise _UsageError("poly: needs at least one coefficient")
        return polynomial_function(Polynomial(tuple(coeffs)))
    if text.startswith("expA:"):
        return exp_growth_function(float(text[len("expA:"):]))
    return expression_function(text, growth_a, growth_k)


def _parse_n_grid(text: str) -> list[float]:
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise _UsageError("n grid spec must be start:factor:count")
        start, factor = float(parts[0]), float(parts[1])
        count = int(parts[2])
        if count < 1 or start <= 0 or factor <= 0:
            raise _UsageError("n grid needs start > 0, factor > 0, count >= 1")
        return [start * factor ** i for i in range(count)]
    return [float(p) for p in text.split(",") if p.strip()]


def _single_n(text: str) -> float:
    values = _parse_n_grid(text)
    if len(values) != 1:
        raise _UsageError("this command takes a single --n value")
    return values[0]


def _build_parser() -> _Parser:
    parser = _Parser(prog="szmd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--n", required=True,
                       help="operator index; grids as start:factor:count or a,b,c")
        p.add_argument("--j", required=True, type=int, help="family parameter")
        p.add_argument("--x", required=True, type=float, help="evaluation point")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--tol", type=float, default=None,
                       help="series tail tolerance (default 1e-12); quadrature "
                            "rel_tol is 100x this value")

    def with_function(p):
        p.add_argument("--f", required=True,
                       help="expression in x, or poly:a0,a1,..., or expA:A")
        p.add_argument("--growth-A", dest="growth_a", type=float, default=1.0,
                       help="declared growth rate A with |f(t)| <= K e^(At)")
        p.add_argument("--growth-K", dest="growth_k", type=float, default=1.0,
                       help="declared growth constant K")

    p = sub.add_parser("eval", help="evaluate the operator image at x")
    common(p)
    with_function(p)

    p = sub.add_parser("deriv", help="evaluate the m-th derivative of the image")
    common(p)
    with_function(p)
    p.add_argument("--m", required=True, type=int, help="derivative order")

    p = sub.add_parser("moments", help="closed-form moment of order r")
    common(p)
    p.add_argument("--r", required=True, type=int, help="moment order")

    p = sub.add_parser("central-moments", help="closed-form central moment of order s")
    common(p)
    p.add_argument("--s", required=True, type=int, help="central-moment order")

    p = sub.add_parser("expand", help="asymptotic-expansion coefficients at x")
    p.add_argument("--j", required=True, type=int)
    p.add_argument("--x", required=True, type=float)
    p.add_argument("--q", required=True, type=int, help="highest order")
    p.add_argument("--m", type=int, default=0, help="derivative order (default 0)")
    with_function(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--out", default=None)

    p = sub.add_parser("converge", help="rate-of-convergence table vs. the modulus bound")
    common(p)
    with_function(p)

    p = sub.add_parser("voronovskaja", help="asymptotic remainder-order fit")
    common(p)
    with_function(p)
    p.add_argument("--q", required=True, type=int, help="expansion order")

    p = sub.add_parser("localize", help="exponential-decay probe for excised functions")
    common(p)
    with_function(p)
    p.add_argument("--delta", required=True, type=float, help="excision half-width")

    return parser


def _tolerances(ns):
    tail_tol = 1e-12 if ns.tol is None else float(ns.tol)
    if not tail_tol > 0:
        raise _UsageError("--tol must be positive")
    rel = min(tail_tol * 100.0, 0.1)
    return QuadratureConfig(rel_tol=rel), tail_tol


def _dispatch(ns):
    """Returns (scalar_doc, report); exactly one is not None."""
    if ns.command == "eval":
        quad, tail_tol = _tolerances(ns)
        f = _parse_function(ns.f, ns.growth_a, ns.growth_k)
        result = evaluate(OperatorParams(_single_n(ns.n), ns.j), f, ns.x, quad, tail_tol)
        return (
            {
                "value": result.value,
                "truncation_error_bound": result.truncation_error_bound,
                "terms_used": result.terms_used,
            },
            None,
        )
    if ns.command == "deriv":
        quad, tail_tol = _tolerances(ns)
        f = _parse_function(ns.f, ns.growth_a, ns.growth_k)
        result = evaluate_derivative(
            OperatorParams(_single_n(ns.n), ns.j), f, ns.x, ns.m, quad, tail_tol
        )
        return (
            {
                "value": result.value,
                "truncation_error_bound": result.truncation_error_bound,
                "terms_used": result.terms_used,
            },
            None,
        )
    if ns.command == "moments":
        value = moment(OperatorParams(_single_n(ns.n), ns.j), ns.r, ns.x)
        return ({"value": value}, None)
    if ns.command == "central-moments":
        split = central_moment(OperatorParams(_single_n(ns.n), ns.j), ns.s, ns.x)
        return ({"main": split.main, "tail": split.tail, "total": split.total}, None)
    if ns.command == "expand":
        f = _parse_function(ns.f, ns.growth_a, ns.growth_k)
        derivs = f.derivatives_at(ns.x, 2 * ns.q + ns.m)
        terms = []
        for k in range(ns.q + 1):
            if ns.m == 0:
                term = expansion_coefficient(ns.j, k, derivs[k : 2 * k + 1], ns.x)
            else:
                term = simultaneous_coefficient(
                    ns.j, k, ns.m, derivs[k + ns.m : 2 * k + ns.m + 1], ns.x
                )
            terms.append(
                {
                    "order": term.order,
                    "derivative_order": term.derivative_order,
                    "value": float(term.value),
                }
            )
        return ({"terms": terms}, None)

    quad, tail_tol = _tolerances(ns)
    f = _parse_function(ns.f, ns.growth_a, ns.growth_k)
    grid = _parse_n_grid(ns.n)
    if ns.command == "converge":
        report = converge_report(f, ns.j, ns.x, grid, q=quad, tail_tol=tail_tol)
    elif ns.command == "voronovskaja":
        report = voronovskaja_fit(f, ns.j, ns.x, ns.q, grid, q=quad, tail_tol=tail_tol)
    elif ns.command == "localize":
        report = localization_probe(f, ns.x, ns.delta, ns.j, grid, q=quad, tail_tol=tail_tol)
    else:  # pragma: no cover
        raise _UsageError(f"unknown command {ns.command!r}")
    return (None, report)


def _emit(ns, scalar_doc, report) -> str:
    if ns.format == "json":
        doc = scalar_doc if scalar_doc is not None else report.to_json_dict()
        return _json_render(doc) + "\n"
    if scalar_doc is not None:
        if "terms" in scalar_doc and isinstance(scalar_doc["terms"], list):
            buf = io.StringIO()
            writer = csv.writer(buf, lineterminator="\n")
            writer.writerow(["order", "derivative_order", "value"])
            for t in scalar_doc["terms"]:
                writer.writerow(
                    [t["order"], t["derivative_order"], _csv_value(t["value"])]
                )
            return buf.getvalue()
        return _scalar_csv(scalar_doc)
    buf = io.StringIO()
    report.write_csv(buf)
    return buf.getvalue()


def _error_doc(code: str, exc: Exception) -> str:
    doc = {"error": {"code": code, "message": str(exc)}}
    if isinstance(exc, GrowthPreconditionError):
        doc["error"]["precondition"] = exc.precondition
    return _json_render(doc) + "\n"


def run(argv) -> int:
    """Parse argv, dispatch, and emit one document; returns the exit code."""
    parser = _build_parser()
    try:
        ns = parser.parse_args(list(argv))
        scalar_doc, report = _dispatch(ns)
    except _UsageError as exc:
        sys.stderr.write(_error_doc("usage", exc))
        return 2
    except SzmdError as exc:
        sys.stderr.write(_error_doc("domain", exc))
        return 1
    text = _emit(ns, scalar_doc, report)
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
