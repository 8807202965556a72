"""Exact counting formulas, asymptotic expressions and convergence diagnostics.

Every exact formula is indexed by the semiperimeter ``n`` (perimeter ``2n``).
The shifted form of the perimeter count, indexed so that ``m = 0`` is
perimeter 8, is available as ``count_perimeter_shifted``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Callable, Iterable

import mpmath

from .errors import IntegralityViolation, OutOfDomain, SourceUnavailable, UnknownName

__all__ = [
    "ExactFormula",
    "AsymptoticExpr",
    "FORMULAS",
    "ASYMPTOTICS",
    "SOURCES",
    "exact",
    "exact_value",
    "fibonacci",
    "asymptotic",
    "OuterTotalReport",
    "total_outer_report",
    "ConvergenceRow",
    "convergence_report",
    "tail_non_increasing",
    "PRECISION",
]

PRECISION = 60


# -- exact formulas -------------------------------------------------------------------

@dataclass(frozen=True)
class ExactFormula:
    name: str
    domain: int
    evaluator: Callable[[int], Fraction]
    description: str
    quarantined: bool = False


def fibonacci(k: int) -> int:
    """``F(k)`` with ``F(1) = F(2) = 1``, by fast doubling."""
    if k < 0:
        raise OutOfDomain(f"Fibonacci index must be >= 0, got {k}")

    def pair(m):  # (F(m), F(m+1))
        if m == 0:
            return 0, 1
        a, b = pair(m // 2)
        c = a * (2 * b - a)
        d = a * a + b * b
        return (d, c + d) if m % 2 else (c, d)

    return pair(k)[0]


def _count_shifted(m: int) -> Fraction:
    return Fraction((2 * m + 11) * 4**m - 4 * (2 * m + 1) * comb(2 * m, m))


def _count_perimeter(n: int) -> Fraction:
    if n == 2:
        return Fraction(1)
    if n == 3:
        return Fraction(2)
    return _count_shifted(n - 4)


def _pow4(k: int) -> Fraction:
    return Fraction(4) ** k


def _total_interior(n: int) -> Fraction:
    return (Fraction(4 * n**3 - 78 * n**2 + 77 * n + 321, 6) * _pow4(n - 5)
            + Fraction(2 * (5 * n - 8) * (n - 3), 3) * comb(2 * n - 6, n - 3))


def _total_deg2(n: int) -> Fraction:
    return (Fraction(2 * n**2 + 15 * n + 11, 2) * _pow4(n - 4)
            - Fraction(2 * (n**2 + 2 * n - 19) * (n - 3), 2 * n - 7) * comb(2 * n - 6, n - 3))


def _total_outer_display(n: int) -> Fraction:
    """The displayed total outer-site formula, evaluated verbatim."""
    return ((50 * n**2 + 79 * n + 105) * _pow4(n - 6) + Fraction(2) ** (n - 6)
            - Fraction((6 * n**2 - 19 * n - 8) * (n - 3), 2 * n - 7))


def _total_outer_binomial(n: int) -> Fraction:
    """The display with ``binom(2n-6, n-3)`` on its last term.

    Integral, and equal to the outer-site totals when a first column strictly
    inside a longer neighbour is credited two outer sites.
    """
    return ((50 * n**2 + 79 * n + 105) * _pow4(n - 6) + Fraction(2) ** (n - 6)
            - Fraction((6 * n**2 - 19 * n - 8) * (n - 3), 2 * n - 7) * comb(2 * n - 6, n - 3))


def _total_outer_fit(n: int) -> Fraction:
    """Closed form matching the census-verified outer-site totals for n >= 5."""
    return (8 * (6 * n**2 + 13 * n + 13) * _pow4(n - 6)
            - Fraction(2 * (3 * n**3 - 17 * n**2 + 15 * n + 27), 2 * n - 7) * comb(2 * n - 6, n - 3))


def _total_outer_quarantined(n: int) -> Fraction:
    return Fraction(_outer_total_oracle(n))


FORMULAS: dict[str, ExactFormula] = {
    f.name: f
    for f in [
        ExactFormula("count_perimeter", 2, _count_perimeter, "convex polyominoes of perimeter 2n"),
        ExactFormula("count_perimeter_shifted", 0, _count_shifted,
                     "convex polyominoes of perimeter 2m+8"),
        ExactFormula("count_cpbu", 2, lambda n: Fraction(fibonacci(2 * n - 3)),
                     "both-sides-staircase polyominoes of perimeter 2n"),
        ExactFormula("count_cpu", 2, lambda n: Fraction(comb(2 * n - 4, n - 2)),
                     "top-staircase polyominoes of perimeter 2n"),
        ExactFormula("total_interior", 5, _total_interior,
                     "interior vertices summed over perimeter 2n"),
        ExactFormula("total_deg2", 5, _total_deg2,
                     "degree-two boundary vertices summed over perimeter 2n"),
        ExactFormula("total_outer", 5, _total_outer_quarantined,
                     "outer sites summed over perimeter 2n (series oracle; display quarantined)",
                     quarantined=True),
        ExactFormula("total_outer_display", 5, _total_outer_display,
                     "the displayed outer-site total, verbatim"),
        ExactFormula("total_outer_binomial", 5, _total_outer_binomial,
                     "the displayed outer-site total with binom(2n-6, n-3) restored"),
        ExactFormula("total_outer_fit", 5, _total_outer_fit,
                     "closed form fitted to the census-verified outer-site totals"),
    ]
}


def _formula(name: str) -> ExactFormula:
    if name not in FORMULAS:
        raise UnknownName(f"unknown formula {name!r}; known: {', '.join(sorted(FORMULAS))}")
    return FORMULAS[name]


def exact_value(name: str, n: int) -> Fraction:
    """The formula's value at ``n`` as a fraction, with no integrality check."""
    f = _formula(name)
    if n < f.domain:
        raise OutOfDomain(f"{name} is defined for n >= {f.domain}, got {n}")
    return f.evaluator(n)


def exact(name: str, n: int) -> int:
    """Exact integer value of formula ``name`` at semiperimeter ``n``.

    Raises IntegralityViolation when the value is not a nonnegative integer.
    ``total_outer`` never raises: its display is quarantined and the value
    comes from the outer-site series instead (see :func:`total_outer_report`).
    """
    val = exact_value(name, n)
    if val.denominator != 1 or val < 0:
        raise IntegralityViolation(f"{name}({n}) = {val} is not a nonnegative integer")
    return int(val)


# -- total outer-site quarantine ----------------------------------------------------------

@lru_cache(maxsize=8)
def _outer_totals(max_n: int, variant: str) -> tuple:
    from . import gfs

    a = gfs.build("j_dq_uni", {"x": max_n}, variant=variant)
    return tuple(int(a.coeff((k,))) for k in range(max_n + 1))


def _series_coefficient(variant: str, n: int) -> int:
    top = max(16, 1 << (n - 1).bit_length())
    return _outer_totals(top, variant)[n]


def _outer_total_oracle(n: int) -> int:
    return _series_coefficient("corrected", n)


@dataclass(frozen=True)
class OuterTotalReport:
    n: int
    display: Fraction
    display_integral: bool
    binomial_restored: int
    printed_series: int
    oracle: int

    @property
    def consistent(self) -> bool:
        return self.display_integral and self.display == self.oracle

    def describe(self) -> str:
        state = "non-integral" if not self.display_integral else "integral"
        return (f"n={self.n}: display={self.display} ({state}); "
                f"display with binomial={self.binomial_restored}; "
                f"printed series={self.printed_series}; oracle={self.oracle}")


def total_outer_report(n: int) -> OuterTotalReport:
    """Compare the displayed outer-site total with the series oracle at ``n``."""
    if n < 5:
        raise OutOfDomain(f"total_outer is defined for n >= 5, got {n}")
    display = _total_outer_display(n)
    try:
        exact("total_outer_display", n)
        integral = True
    except IntegralityViolation:
        integral = False
    return OuterTotalReport(
        n=n,
        display=display,
        display_integral=integral,
        binomial_restored=int(_total_outer_binomial(n)),
        printed_series=_series_coefficient("printed", n),
        oracle=_outer_total_oracle(n),
    )


# -- asymptotics ------------------------------------------------------------------------------

@dataclass(frozen=True)
class AsymptoticExpr:
    name: str
    expression: str
    evaluator: Callable[[int], mpmath.mpf]


def _consts():
    sqrt5 = mpmath.sqrt(5)
    return {
        "pi": mpmath.pi,
        "sqrt5": sqrt5,
        "root4_5": mpmath.root(5, 4),
        "root4_125": mpmath.root(125, 4),
        "phi2": (3 + sqrt5) / 2,
    }


def _avg_interior(n, c):
    return (mpmath.mpf(n) ** 2 / 12 + n * mpmath.sqrt(n) / (3 * mpmath.sqrt(c["pi"]))
            - (21 * c["pi"] - 16) * n / (12 * c["pi"]))


def _avg_deg2(n, c):
    return mpmath.mpf(n + 6) / 2 + 1 / mpmath.sqrt(c["pi"] * n) + (16 - 7 * c["pi"]) / (4 * c["pi"] * n)


def _count_deg23(n, c):
    return ((n + 1) * c["phi2"] ** (n - 3) / 40
            + c["root4_5"] * (2 - c["sqrt5"]) / (80 * mpmath.sqrt(c["pi"] * n)) * c["phi2"] ** (n - 2))


def _total_d4_given_deg23(n, c):
    return (c["sqrt5"] * (n + 1) * (n + 2) / 200 * c["phi2"] ** (n - 3)
            - c["root4_125"] * mpmath.mpf(n) ** mpmath.mpf(1.5) / (200 * mpmath.sqrt(c["pi"]))
            * c["phi2"] ** (n - mpmath.mpf(7) / 2))


def _avg_d4_given_deg23(n, c):
    return (n / c["sqrt5"]
            - c["root4_125"] * (c["sqrt5"] - 1) * mpmath.sqrt(n) / (10 * mpmath.sqrt(c["pi"])))


def _count_outer(n, c):
    return (3 * (c["sqrt5"] - 1) / (20 * mpmath.sqrt(c["pi"] * n) * c["root4_5"])) * c["phi2"] ** n


def _avg_outer_given_perimeter(n, c):
    return mpmath.mpf(25) * n / 16 + mpmath.sqrt(n) / (4 * mpmath.sqrt(c["pi"])) + mpmath.mpf(1) / 8


def _avg_perimeter_given_outer(n, c):
    return c["root4_5"] * n


ASYMPTOTICS: dict[str, AsymptoticExpr] = {
    a.name: a
    for a in [
        AsymptoticExpr("avg_interior", "n^2/12 + n sqrt(n)/(3 sqrt(pi)) - (21 pi - 16) n/(12 pi)", _avg_interior),
        AsymptoticExpr("avg_deg2", "(n+6)/2 + 1/sqrt(pi n) + (16 - 7 pi)/(4 pi n)", _avg_deg2),
        AsymptoticExpr("count_deg23", "(n+1)/40 phi2^(n-3) + 5^(1/4)(2-sqrt5)/(80 sqrt(pi n)) phi2^(n-2)",
                       _count_deg23),
        AsymptoticExpr("total_d4_given_deg23",
                       "sqrt5 (n+1)(n+2)/200 phi2^(n-3) - 125^(1/4) n^(3/2)/(200 sqrt(pi)) phi2^(n-7/2)",
                       _total_d4_given_deg23),
        AsymptoticExpr("avg_d4_given_deg23", "n/sqrt5 - 125^(1/4)(sqrt5-1) sqrt(n)/(10 sqrt(pi))",
                       _avg_d4_given_deg23),
        AsymptoticExpr("count_outer", "3(sqrt5-1)/(20 sqrt(pi n) 5^(1/4)) phi2^n", _count_outer),
        AsymptoticExpr("avg_outer_given_perimeter", "25n/16 + sqrt(n)/(4 sqrt(pi)) + 1/8",
                       _avg_outer_given_perimeter),
        AsymptoticExpr("avg_perimeter_given_outer", "5^(1/4) n", _avg_perimeter_given_outer),
    ]
}


def asymptotic(name: str, n: int) -> mpmath.mpf:
    """Evaluate asymptotic expression ``name`` at ``n`` with 60-digit precision."""
    if name not in ASYMPTOTICS:
        raise UnknownName(f"unknown asymptotic {name!r}; known: {', '.join(sorted(ASYMPTOTICS))}")
    if n < 1:
        raise OutOfDomain(f"asymptotic expressions need n >= 1, got {n}")
    with mpmath.workdps(PRECISION):
        return +ASYMPTOTICS[name].evaluator(n, _consts())


# -- exact sources for the convergence report ------------------------------------------------

def _series_coeffs(name: str, var: str, top: int, variant: str | None = None) -> list[Fraction]:
    from . import gfs

    a = gfs.build(name, {var: top}, variant=variant)
    return [a.coeff((k,)) for k in range(top + 1)]


def _census_table(top: int, stats=()):
    from .enumerator import census

    return census(top, statistics=stats)


def _avg_formula(total: str):
    def source(ns, variant):
        return {n: Fraction(exact(total, n), exact("count_perimeter", n)) for n in ns}
    return source


def _avg_series(gf: str):
    def source(ns, variant):
        top = max(ns)
        num = _series_coeffs(gf, "x", top, variant if gf == "j_dq_uni" else None)
        den = _series_coeffs("cp_halfperimeter", "x", top)
        return {n: num[n] / den[n] for n in ns}
    return source


def _avg_census(stat: str):
    def source(ns, variant):
        t = _census_table(max(ns), (stat,))
        return {n: Fraction(t.rows[n].totals[stat], t.rows[n].count) for n in ns}
    return source


def _deg23_series(ns, variant):
    top = max(ns)
    c = _series_coeffs("d_deg23", "q", top)
    return {n: c[n] for n in ns}


def _deg23_census(ns, variant):
    from .enumerator import histogram

    h = histogram(max(2, max(ns) - 2), "d2+d3")
    return {n: Fraction(h.counts.get(n, 0)) for n in ns}


def _d4_series(avg: bool):
    def source(ns, variant):
        from . import gfs

        top = max(ns)
        a = gfs.deg23_d4_series(top, max(top - 4, 0))
        count = {n: Fraction(0) for n in ns}
        total = {n: Fraction(0) for n in ns}
        for (e, d4), c in a.coeffs.items():
            if e in count:
                count[e] += c
                total[e] += d4 * c
        if avg:
            return {n: total[n] / count[n] if count[n] else None for n in ns}
        return total
    return source


def _outer_count_series(ns, variant):
    top = max(ns)
    c = _series_coeffs("j_outer_uni", "q", top, variant)
    return {n: c[n] for n in ns}


def _outer_count_census(ns, variant):
    from .enumerator import census_by_outer

    t = census_by_outer(max(ns))
    return {n: Fraction(t.rows[n].count) for n in ns}


def _perimeter_given_outer_series(ns, variant):
    from . import gfs

    top = max(ns)
    a = gfs.build("j_semi", {"x": top, "q": top})
    count = {n: Fraction(0) for n in ns}
    total = {n: Fraction(0) for n in ns}
    for (sp, o), c in a.coeffs.items():
        if o in count:
            count[o] += c
            total[o] += 2 * sp * c
    return {n: total[n] / count[n] if count[n] else None for n in ns}


def _perimeter_given_outer_census(ns, variant):
    from .enumerator import census_by_outer

    t = census_by_outer(max(ns))
    return {n: Fraction(t.rows[n].totals["perimeter"], t.rows[n].count) if t.rows[n].count else None
            for n in ns}


SOURCES: dict[str, dict[str, Callable]] = {
    "avg_interior": {"formula": _avg_formula("total_interior"), "series": _avg_series("f_dq_uni"),
                     "census": _avg_census("int")},
    "avg_deg2": {"formula": _avg_formula("total_deg2"), "series": _avg_series("e_dq_uni"),
                 "census": _avg_census("d2")},
    "count_deg23": {"series": _deg23_series, "census": _deg23_census},
    "total_d4_given_deg23": {"series": _d4_series(avg=False)},
    "avg_d4_given_deg23": {"series": _d4_series(avg=True)},
    "count_outer": {"series": _outer_count_series, "census": _outer_count_census},
    "avg_outer_given_perimeter": {"formula": _avg_formula("total_outer_fit"),
                                  "series": _avg_series("j_dq_uni"),
                                  "census": _avg_census("o")},
    "avg_perimeter_given_outer": {"series": _perimeter_given_outer_series,
                                  "census": _perimeter_given_outer_census},
}

# smallest n each target is meaningful for
_MIN_N = {"avg_interior": 5, "avg_deg2": 5, "count_deg23": 4, "total_d4_given_deg23": 4,
          "avg_d4_given_deg23": 4, "count_outer": 4, "avg_outer_given_perimeter": 5,
          "avg_perimeter_given_outer": 4}


def min_n(target: str) -> int:
    """Smallest n at which the exact sources of ``target`` are defined."""
    if target not in _MIN_N:
        raise UnknownName(f"unknown target {target!r}; known: {', '.join(sorted(ASYMPTOTICS))}")
    return _MIN_N[target]


# the enumerator is exhaustive, so census sources stop at modest sizes
CENSUS_LIMIT = 13


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    exact: Fraction
    asymptotic: mpmath.mpf
    ratio: mpmath.mpf

    @property
    def error(self) -> mpmath.mpf:
        return abs(self.ratio - 1)


def convergence_report(target: str, n_range: Iterable[int], source: str = "formula",
                       variant: str | None = None) -> list[ConvergenceRow]:
    """Rows ``(n, exact, asymptotic, exact/asymptotic)`` over ``n_range``.

    Averages over an empty set of polyominoes (e.g. five outer sites) are
    skipped.
    ``variant`` selects the catalog variant for series-backed outer-site
    sources (``"printed"`` reproduces the displayed closed forms).
    """
    if target not in ASYMPTOTICS:
        raise UnknownName(f"unknown target {target!r}; known: {', '.join(sorted(ASYMPTOTICS))}")
    ns = sorted(set(n_range))
    if not ns:
        raise SourceUnavailable("empty n range")
    sources = SOURCES[target]
    if source not in sources:
        raise SourceUnavailable(f"{target} has no {source!r} source; available: {', '.join(sources)}")
    if ns[0] < _MIN_N[target]:
        raise SourceUnavailable(f"{target} starts at n = {_MIN_N[target]}, got {ns[0]}")
    if source == "census" and ns[-1] > CENSUS_LIMIT:
        raise SourceUnavailable(f"census sources stop at n = {CENSUS_LIMIT}; use formula or series")
    exacts = sources[source](ns, variant or "corrected")
    rows = []
    with mpmath.workdps(PRECISION):
        for n in ns:
            e = exacts[n]
            if e is None:  # an average over no polyominoes
                continue
            a = asymptotic(target, n)
            r = (mpmath.mpf(e.numerator) / e.denominator) / a
            rows.append(ConvergenceRow(n, e, a, r))
    return rows


def tail_non_increasing(rows: list[ConvergenceRow], fraction: float = 0.5) -> bool:
    """True when ``|ratio - 1|`` never increases over the last part of the rows."""
    tail = rows[int(len(rows) * (1 - fraction)):]
    errs = [r.error for r in tail]
    return all(b <= a for a, b in zip(errs, errs[1:]))
