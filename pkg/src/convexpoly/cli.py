"""Command-line entry point: ``convexpoly <subcommand> ...``.

Exit codes: 0 success, 1 verification mismatch, 2 usage error.
Every number is printed as an exact decimal string (``p/q`` for rationals),
except the ``asymptotic`` table, which uses fixed 30-digit decimals.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import mpmath

from . import formulas, gfs, series, verify
from .enumerator import CLASSES, STATISTICS, census, census_by_outer, enumerate_polyominoes, histogram
from .errors import ConvexPolyError
from .geometry import cells_of, compute_stats, from_columns, read_polyomino
from .recurrences import dp_series

__all__ = ["main", "run", "UsageError"]

STATS = ("count",) + STATISTICS
METHODS = ("brute", "dp", "series", "formula")
GRADES = ("sp", "outer", "deg23")


class UsageError(Exception):
    """Arguments that parse but cannot be combined."""


def _class(name: str) -> str:
    for c in CLASSES:
        if c.lower() == name.lower():
            return c
    raise argparse.ArgumentTypeError(f"class must be one of {', '.join(c.lower() for c in CLASSES)}")


def _number(v) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


# -- output ---------------------------------------------------------------------------

def _table(header: Sequence[str], rows: list[Sequence], fmt: str, meta: dict | None = None) -> str:
    if fmt == "json":
        obj = dict(meta or {})
        obj["rows"] = [dict(zip(header, map(str, r))) for r in rows]
        return json.dumps(obj, indent=2) + "\n"
    lines = [",".join(header)] + [",".join(map(str, r)) for r in rows]
    return "\n".join(lines) + "\n"


# -- count ----------------------------------------------------------------------------

_DP_FAMILY = {"count": "perimeter_area", "a": "perimeter_area", "int": "interior", "d2": "degrees", "o": "outer"}
_SERIES_SP = {"int": "f_dq_uni", "d2": "e_dq_uni", "o": "j_dq_uni"}
_FORMULA_SP = {"int": "total_interior", "d2": "total_deg2", "o": "total_outer"}
_COUNT_FORMULA = {"CP": "count_perimeter", "CPu": "count_cpu", "CPb": "count_cpu", "CPbu": "count_cpbu"}
_COUNT_SERIES = {"CPu": "cpu_z", "CPb": "cpu_z", "CPbu": "cpbu_z"}


@dataclass
class CountRequest:
    stat: str
    grade: str
    method: str
    max: int
    cls: str = "CP"
    variant: str | None = None
    threads: int = 1


def validate_count(r: CountRequest) -> Callable[[], dict[int, Fraction]]:
    """Check method/statistic/grade compatibility and return the computation."""
    if r.grade == "sp":
        if r.max < 2:
            raise UsageError("--max must be at least 2 for --grade sp")
        if r.method == "brute":
            return lambda: _brute_sp(r)
        if r.method == "dp":
            if r.stat not in _DP_FAMILY:
                raise UsageError(f"--method dp supports --stat {', '.join(_DP_FAMILY)}")
            if r.cls == "CPb":
                raise UsageError("--method dp supports classes cp, cpu, cpbu")
            return lambda: _dp_sp(r)
        if r.method == "series":
            if r.stat == "count":
                return lambda: _series_count(r)
            if r.stat in _SERIES_SP and r.cls == "CP":
                return lambda: _series_uni(_SERIES_SP[r.stat], "x", 2, r.max, r.variant)
            raise UsageError("--method series supports --stat count (any class) and int, d2, o (class cp)")
        if r.stat == "count":
            return lambda: _formula(_COUNT_FORMULA[r.cls], r.max)
        if r.stat in _FORMULA_SP and r.cls == "CP":
            return lambda: _formula(_FORMULA_SP[r.stat], r.max)
        raise UsageError("--method formula supports --stat count (any class) and int, d2, o (class cp)")
    if r.stat != "count" or r.cls != "CP":
        raise UsageError(f"--grade {r.grade} supports only --stat count with class cp")
    if r.method == "formula":
        raise UsageError(f"--grade {r.grade} has no formula method")
    lo = 4 if r.grade == "outer" else 0
    if r.max < lo:
        raise UsageError(f"--max must be at least {lo} for --grade {r.grade}")
    if r.grade == "outer":
        return {
            "brute": lambda: dict(census_by_outer(r.max, r.threads).counts()),
            "dp": lambda: _dp_graded(r.max, "outer", lambda e: e[2]),
            "series": lambda: _series_uni("j_outer_uni", "q", 4, r.max, r.variant),
        }[r.method]
    return {
        "brute": lambda: _brute_deg23(r.max),
        "dp": lambda: _dp_graded(r.max, "degrees", lambda e: e[2] + e[3], all_degrees=True),
        "series": lambda: _series_uni("d_deg23", "q", 0, r.max, r.variant),
    }[r.method]


def _brute_sp(r: CountRequest) -> dict[int, Fraction]:
    stats = () if r.stat == "count" else (r.stat,)
    t = census(r.max, r.cls, stats, r.threads)
    return dict(t.counts() if r.stat == "count" else t.totals(r.stat))


def _dp_sp(r: CountRequest) -> dict[int, Fraction]:
    # every polyomino of semiperimeter <= max fits the box; marks are complete
    d = dp_series(_DP_FAMILY[r.stat], r.cls, x_box=r.max, y_box=r.max)
    out = {n: 0 for n in range(2, r.max + 1)}
    for (v, h, *marks), c in d.coeffs.items():
        if v + h <= r.max:
            out[v + h] += c if r.stat == "count" else c * marks[0]
    return out


def _dp_graded(top: int, family: str, grade, all_degrees: bool = False) -> dict[int, Fraction]:
    # grade <= top forces h + v <= top - 2, so v, h <= top - 3
    box = max(top - 3, 1)
    d = dp_series(family, "CP", x_box=box, y_box=box, all_degrees=all_degrees)
    lo = 4 if family == "outer" else 0
    out = {g: 0 for g in range(lo, top + 1)}
    for e, c in d.coeffs.items():
        g = grade(e)
        if g <= top and e[0] + e[1] <= top - 2:
            out[g] += c
    return out


def _brute_deg23(top: int) -> dict[int, Fraction]:
    h = histogram(max(top - 2, 2), "d2+d3")
    return {g: h[g] for g in range(0, top + 1)}


def _series_uni(name: str, var: str, lo: int, hi: int, variant) -> dict[int, Fraction]:
    a = gfs.build(name, {var: hi}, variant=variant)
    return {k: a.coeff((k,)) for k in range(lo, hi + 1)}


def _series_count(r: CountRequest) -> dict[int, Fraction]:
    if r.cls == "CP":
        return _series_uni("cp_halfperimeter", "x", 2, r.max, r.variant)
    a = gfs.build(_COUNT_SERIES[r.cls], {"x": r.max, "y": r.max, "z": r.max})
    a = gfs.at_diagonal(series.substitute(a, "z", 1, bound=series.DegreeBound(-1, y=1)))
    return {k: a.coeff((k,)) for k in range(2, r.max + 1)}


def _formula(name: str, top: int) -> dict[int, Fraction]:
    lo = formulas.FORMULAS[name].domain
    return {n: formulas.exact_value(name, n) for n in range(lo, top + 1)}


# -- subcommands ----------------------------------------------------------------------

def _cmd_enumerate(a) -> tuple[str, int]:
    items = []
    for p in enumerate_polyominoes(a.max_sp, a.cls):
        if a.emit == "spans":
            items.append({"spans": [list(s) for s in p.spans]} if a.format == "json"
                         else ";".join(f"{b} {u}" for b, u in p.spans))
        elif a.emit == "cells":
            cells = sorted(cells_of(p))
            items.append({"cells": [list(c) for c in cells]} if a.format == "json"
                         else ";".join(f"{x} {y}" for x, y in cells))
        else:
            items.append(compute_stats(p).as_dict())
    if a.format == "json":
        return json.dumps({"class": a.cls, "max_sp": a.max_sp, "polyominoes": items}, indent=2) + "\n", 0
    if a.emit == "stats":
        header = list(compute_stats(from_columns([(0, 0)])).as_dict())
        return _table(header, [list(d.values()) for d in items], "csv"), 0
    return _table([a.emit], [[i] for i in items], "csv"), 0


def _cmd_count(a) -> tuple[str, int]:
    req = CountRequest(a.stat, a.grade, a.method, a.max, a.cls, a.variant, a.threads)
    compute = validate_count(req)
    values = compute()
    rows = [[g, _number(v)] for g, v in sorted(values.items())]
    meta = {"stat": a.stat, "grade": a.grade, "method": a.method, "class": a.cls}
    return _table([a.grade, a.stat], rows, a.format, meta), 0


def _parse_box(text: str) -> dict[str, int]:
    box = {}
    for part in text.split(","):
        k, sep, v = part.partition("=")
        if not sep or not v.strip().lstrip("-").isdigit():
            raise UsageError(f"--box expects var=deg,... got {text!r}")
        box[k.strip()] = int(v)
    return box


def _cmd_series(a) -> tuple[str, int]:
    box = _parse_box(a.box)
    s = gfs.build(a.gf, box, variant=a.variant)
    if a.format == "json":
        obj = {"gf": a.gf, "variant": a.variant or gfs.CATALOG[a.gf].default_variant,
               "vars": list(s.vars), "box": list(s.box),
               "terms": [{"exponents": list(e), "coefficient": _number(c)} for e, c in sorted(s.coeffs.items())]}
        return json.dumps(obj, indent=2) + "\n", 0
    return series.dump(s), 0


def _cmd_verify(a) -> tuple[str, int]:
    if a.suite == "all":
        results = verify.run_all(a.max, include_printed=not a.skip_printed)
    else:
        results = verify.run_suite(a.suite, a.max, include_printed=not a.skip_printed)
    if a.format == "json":
        out = json.dumps([r.__dict__ for r in results], indent=2) + "\n"
    else:
        out = "".join(r.line() + "\n" for r in results)
    return out, 0 if all(r.ok for r in results) else 1


def _cmd_asymptotic(a) -> tuple[str, int]:
    lo = a.min_n if a.min_n is not None else formulas.min_n(a.target)
    source = a.source or next(iter(formulas.SOURCES[a.target]))
    rows = formulas.convergence_report(a.target, range(lo, a.max_n + 1), source, a.variant)
    with mpmath.workdps(formulas.PRECISION):
        table = [[r.n, _number(r.exact), mpmath.nstr(r.asymptotic, 30, strip_zeros=False),
                  mpmath.nstr(r.ratio, 30, strip_zeros=False)] for r in rows]
    meta = {"target": a.target, "source": source, "expression": formulas.ASYMPTOTICS[a.target].expression}
    return _table(["n", "exact", "asymptotic", "ratio"], table, a.format, meta), 0


def _cmd_stats(a) -> tuple[str, int]:
    try:
        with open(a.input, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {a.input}: {exc.strerror}") from exc
    d = compute_stats(read_polyomino(text)).as_dict()
    if a.format == "json":
        return json.dumps({k: d[k] for k in d}, indent=2) + "\n", 0
    return _table(list(d), [list(d.values())], "csv"), 0


# -- parser -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="convexpoly", description="Convex polyomino enumeration and statistics.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write to this file instead of standard output")
    common.add_argument("--threads", type=int, default=1, help="worker processes for the enumerator")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enumerate", parents=[common], help="list polyominoes up to a semiperimeter")
    e.add_argument("--max-sp", type=int, required=True)
    e.add_argument("--class", dest="cls", type=_class, default="CP")
    e.add_argument("--emit", choices=("spans", "cells", "stats"), default="spans")
    e.set_defaults(run=_cmd_enumerate)

    c = sub.add_parser("count", parents=[common], help="counts or statistic totals per grade")
    c.add_argument("--stat", choices=STATS, default="count")
    c.add_argument("--max", type=int, required=True)
    c.add_argument("--method", choices=METHODS, default="brute")
    c.add_argument("--grade", choices=GRADES, default="sp")
    c.add_argument("--class", dest="cls", type=_class, default="CP")
    c.add_argument("--variant", help="catalog variant for --method series")
    c.set_defaults(run=_cmd_count)

    s = sub.add_parser("series", parents=[common], help="expand a generating function in a box")
    s.add_argument("--gf", required=True, choices=gfs.catalog_names())
    s.add_argument("--box", required=True, help="e.g. x=8,q=13")
    s.add_argument("--variant")
    s.set_defaults(run=_cmd_series)

    v = sub.add_parser("verify", parents=[common], help="run cross-method verification suites")
    v.add_argument("--suite", choices=verify.SUITES + ("all",), default="all")
    v.add_argument("--max", type=int, default=12)
    v.add_argument("--skip-printed", action="store_true",
                   help="leave out checks of displayed closed forms known to be mistyped")
    v.set_defaults(run=_cmd_verify)

    a = sub.add_parser("asymptotic", parents=[common], help="exact/asymptotic ratio table")
    a.add_argument("--target", required=True, choices=sorted(formulas.ASYMPTOTICS))
    a.add_argument("--max-n", type=int, required=True)
    a.add_argument("--min-n", type=int)
    a.add_argument("--source", choices=("formula", "series", "census"),
                   help="exact source; defaults to the first one available for the target")
    a.add_argument("--variant")
    a.set_defaults(run=_cmd_asymptotic)

    st = sub.add_parser("stats", parents=[common], help="statistics of one polyomino file")
    st.add_argument("--in", dest="input", required=True)
    st.set_defaults(run=_cmd_stats)
    return p


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors itself
        return 0 if exc.code == 0 else 2
    try:
        text, code = args.run(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvexPolyError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
