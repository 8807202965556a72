"""Cross-method verification suites shared by the CLI and the acceptance tests.

Each check compares two independently computed objects (census, column DP,
closed-form series, exact formula) and records the first divergence with the
provenance of both sides.  Checks flagged ``printed`` compare a displayed
closed form verbatim; several of those are known to fail.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping

from . import formulas, gfs
from .enumerator import (STATISTICS, CensusTable, census, census_by_outer, certified_max_grade,
                         enumerate_with_stats, histogram)
from .errors import ConvexPolyError, UnknownName
from .recurrences import FAMILIES, dp_series, dp_vs_bruteforce
from .series import DegreeBound, TruncatedSeries, derive, substitute

__all__ = [
    "CheckResult",
    "SUITES",
    "PRINTED_OUTER_SERIES",
    "run_suite",
    "run_all",
    "compare_sequences",
    "compare_series",
]

SUITES = ("perimeter", "interior", "degrees", "outer", "kernels", "identities")

# q^4 + 2q^6 + 4q^7 + 10q^8 + 28q^9 + 77q^10 + 208q^11 + 586q^12 + 1572q^13
PRINTED_OUTER_SERIES = {4: 1, 5: 0, 6: 2, 7: 4, 8: 10, 9: 28, 10: 77, 11: 208, 12: 586, 13: 1572}


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    ok: bool
    detail: str
    printed: bool = False

    def line(self) -> str:
        tag = " [printed form]" if self.printed else ""
        return f"{'PASS' if self.ok else 'FAIL'} {self.suite}/{self.name}{tag}: {self.detail}"


def compare_sequences(left_label: str, left: Mapping[int, int], right_label: str,
                      right: Mapping[int, int]) -> tuple[bool, str]:
    keys = sorted(set(left) | set(right))
    for k in keys:
        a, b = left.get(k), right.get(k)
        if a != b:
            return False, f"{left_label} vs {right_label}: first divergence at n={k}: {a} vs {b}"
    return True, f"{left_label} = {right_label} for n in {keys[0]}..{keys[-1]}" if keys else "empty"


def compare_series(left_label: str, a: TruncatedSeries, right_label: str,
                   b: TruncatedSeries) -> tuple[bool, str]:
    a2, b2 = a.restrict(b)
    diff = a2 - b2
    if diff.is_zero():
        return True, f"{left_label} = {right_label} on box {dict(zip(a2.vars, a2.box))}"
    e = diff.support()[0]
    where = " ".join(f"{v}^{k}" for v, k in zip(a2.vars, e))
    return False, (f"{left_label} vs {right_label}: first divergence at {where}: "
                   f"{a2.coeff(e)} vs {b2.coeff(e)}")


def _displayed_only(entry: str, variant: str) -> bool:
    # a verbatim variant that has a corrected sibling
    return variant == "printed" and len(gfs.CATALOG[entry].variants) > 1


class _Suite:
    def __init__(self, name: str, include_printed: bool):
        self.name = name
        self.include_printed = include_printed
        self.results: list[CheckResult] = []

    def check(self, name: str, fn: Callable[[], tuple[bool, str]], printed: bool = False):
        if printed and not self.include_printed:
            return
        try:
            ok, detail = fn()
        except ConvexPolyError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        self.results.append(CheckResult(self.name, name, ok, detail, printed))


# -- cached sources -----------------------------------------------------------------------

_CENSUS: dict[str, CensusTable] = {}


def _census(n: int, cls: str = "CP", stats: tuple = ()) -> CensusTable:
    """Census with every statistic, computed once per class at the largest size asked."""
    table = _CENSUS.get(cls)
    if table is None or max(table.rows) < n:
        table = _CENSUS[cls] = census(n, cls, STATISTICS)
    rows = {g: r for g, r in table.rows.items() if g <= n}
    return CensusTable(table.grading, rows, table.statistics)


@lru_cache(maxsize=4)
def _outer_census(max_o: int):
    return census_by_outer(max_o)


def _uni(a: TruncatedSeries, lo: int, hi: int) -> dict[int, int]:
    out = {}
    for k in range(lo, hi + 1):
        c = a.coeff((k,))
        out[k] = int(c) if c.denominator == 1 else c
    return out


_Z1 = DegreeBound(-1, y=1)


def _at_z1(a: TruncatedSeries) -> TruncatedSeries:
    return substitute(a, "z", 1, bound=_Z1)


def _at_t1(a: TruncatedSeries, y_box: int) -> TruncatedSeries:
    return substitute(a, "t", 1, bound=DegreeBound(0, x=y_box))


def _dq_at1(a: TruncatedSeries, bound: DegreeBound) -> TruncatedSeries:
    return substitute(derive(a, "q"), "q", 1, bound=bound)


def _diag_counts(a: TruncatedSeries, lo: int, hi: int) -> dict[int, int]:
    return _uni(gfs.at_diagonal(a), lo, hi)


# -- suites ----------------------------------------------------------------------------

def _perimeter(s: _Suite, n: int):
    counts = _census(n).counts()
    s.check("census=count_perimeter", lambda: compare_sequences(
        f"census(CP, sp<={n})", counts, "formula count_perimeter",
        {k: formulas.exact("count_perimeter", k) for k in range(2, n + 1)}))
    for variant in gfs.CATALOG["cp_halfperimeter"].variants:
        s.check(f"census=cp_halfperimeter[{variant}]", lambda v=variant: compare_sequences(
            f"census(CP, sp<={n})", counts, f"series cp_halfperimeter[{v}]",
            _uni(gfs.build("cp_halfperimeter", {"x": n}, variant=v), 2, n)), printed=_displayed_only("cp_halfperimeter", variant))
    s.check("census=cp_xy(y:=x)", lambda: compare_sequences(
        f"census(CP, sp<={n})", counts, "series cp_xy at y:=x",
        _diag_counts(gfs.build("cp_xy", {"x": n, "y": n}), 2, n)))
    s.check("census=dp(perimeter)", lambda: compare_sequences(
        f"census(CP, sp<={n})", counts, "dp perimeter_area CP at t=1",
        _diag_counts(_at_t1(dp_series("perimeter_area", "CP", x_box=n, y_box=n), n), 2, n)))
    for cls, formula, gf in (("CPbu", "count_cpbu", "cpbu_z"), ("CPu", "count_cpu", "cpu_z")):
        cc = _census(n, cls).counts()
        s.check(f"census={formula}", lambda cc=cc, cls=cls, formula=formula: compare_sequences(
            f"census({cls}, sp<={n})", cc, f"formula {formula}",
            {k: formulas.exact(formula, k) for k in range(2, n + 1)}))
        s.check(f"census=dp({cls})", lambda cc=cc, cls=cls: compare_sequences(
            f"census({cls}, sp<={n})", cc, f"dp perimeter_area {cls} at t=1",
            _diag_counts(_at_t1(dp_series("perimeter_area", cls, x_box=n, y_box=n), n), 2, n)))
        s.check(f"census={gf}", lambda cc=cc, cls=cls, gf=gf: compare_sequences(
            f"census({cls}, sp<={n})", cc, f"series {gf} at z=1, y:=x",
            _diag_counts(_at_z1(gfs.build(gf, {"x": n, "y": n, "z": n})), 2, n)))
    s.check("census CPb = census CPu", lambda: compare_sequences(
        f"census(CPb, sp<={n})", _census(n, "CPb").counts(), f"census(CPu, sp<={n})", _census(n, "CPu").counts()))


def _interior(s: _Suite, n: int):
    totals = _census(n, "CP", ("int",)).totals("int")
    rng = range(5, n + 1)
    s.check("census=total_interior", lambda: compare_sequences(
        f"census(CP, sp<={n}) int totals", {k: totals[k] for k in rng}, "formula total_interior",
        {k: formulas.exact("total_interior", k) for k in rng}))
    s.check("census=f_dq_uni", lambda: compare_sequences(
        f"census(CP, sp<={n}) int totals", {k: totals[k] for k in rng}, "series f_dq_uni",
        _uni(gfs.build("f_dq_uni", {"x": n}), 5, n)))
    X = min(n, 6)
    q_bound = DegreeBound(-(X - 1), x=X - 1)
    fi = dp_series("interior", "CP", x_box=X, y_box=X, with_z=True)
    fiu = dp_series("interior", "CPu", x_box=X, y_box=X, with_z=True)
    s.check("dp=f_dq", lambda: compare_series(
        "series f_dq", gfs.build("f_dq", {"x": X, "y": X}), "dp interior CP d/dq at q=1, z=1",
        _at_z1(_dq_at1(fi, q_bound))))
    s.check("dp=f_u_dq", lambda: compare_series(
        "series f_u_dq", gfs.build("f_u_dq", {"x": X, "y": X}), "dp interior CPu d/dq at q=1, z=1",
        _at_z1(_dq_at1(fiu, q_bound))))
    fiu1 = substitute(fiu, "q", 1, bound=q_bound)
    for variant in gfs.CATALOG["f_u_z1"].variants:
        s.check(f"dp=f_u_z1[{variant}]", lambda v=variant: compare_series(
            f"series f_u_z1[{v}]", gfs.build("f_u_z1", {"x": X, "y": X, "z": X - 1}, variant=v),
            "dp interior CPu at q=1", fiu1), printed=_displayed_only("f_u_z1", variant))
    fz = substitute(fi, "q", 1, bound=q_bound)
    s.check("dp=f_at_11", lambda: compare_series(
        "series f_at_11", gfs.build("f_at_11", {"x": X, "y": X}), "dp interior CP at q=1, z=1", _at_z1(fz)))
    s.check("dp=f_dz", lambda: compare_series(
        "series f_dz", gfs.build("f_dz", {"x": X, "y": X}), "dp interior CP d/dz at z=1, q=1",
        substitute(derive(fz, "z"), "z", 1, bound=DegreeBound(-2, y=1))))


def _degrees(s: _Suite, n: int):
    n = min(n, 11)
    totals = _census(n, "CP", ("d2",)).totals("d2")
    rng = range(5, n + 1)
    s.check("census=total_deg2", lambda: compare_sequences(
        f"census(CP, sp<={n}) d2 totals", {k: totals[k] for k in rng}, "formula total_deg2",
        {k: formulas.exact("total_deg2", k) for k in rng}))
    s.check("census=e_dq_uni", lambda: compare_sequences(
        f"census(CP, sp<={n}) d2 totals", {k: totals[k] for k in rng}, "series e_dq_uni",
        _uni(gfs.build("e_dq_uni", {"x": n}), 5, n)))

    def identities():
        seen = 0
        for p, st in enumerate_with_stats(n):
            seen += 1
            if st.d4 != st.d2 - 4:
                return False, f"d4 != d2 - 4 on {p}: {st}"
            if st.d2 + st.d3 + st.d4 != 2 * (st.h + st.v):
                return False, f"d2 + d3 + d4 != 2(h + v) on {p}: {st}"
        return True, f"d4 = d2 - 4 and d2 + d3 + d4 = 2(h + v) on all {seen} polyominoes with sp <= {n}"
    s.check("per-polyomino degree identities", identities)

    h23 = histogram(n, "d2+d3")
    top = certified_max_grade("d2+d3", n)
    s.check("histogram(d2+d3)=d_deg23", lambda: compare_sequences(
        f"census histogram d2+d3 (certified <= {top})", {k: h23[k] for k in range(top + 1)},
        "series d_deg23", _uni(gfs.build("d_deg23", {"q": top}), 0, top)))
    s.check("histogram(d2+d3)=e_full route", lambda: compare_sequences(
        f"census histogram d2+d3 (certified <= {top})", {k: h23[k] for k in range(top + 1)},
        "degree-two series regraded by d2+d3", _uni(gfs.deg23_series(top), 0, top)))
    h34 = histogram(n, "d3+d4")
    top34 = certified_max_grade("d3+d4", n)
    s.check("histogram(d2+d3=n)=histogram(d3+d4=n-4)", lambda: compare_sequences(
        f"histogram d2+d3 (4..{top34 + 4})", {k: h23[k] for k in range(4, min(top, top34 + 4) + 1)},
        "histogram d3+d4 shifted by 4", {k: h34[k - 4] for k in range(4, min(top, top34 + 4) + 1)}))

    X = min(n, 6)
    for cls, name in (("CPbu", "e_bu"), ("CPu", "e_u")):
        d = dp_series("degrees", cls, x_box=X, y_box=X, with_z=True)
        for variant in gfs.CATALOG[name].variants:
            s.check(f"dp={name}[{variant}]", lambda d=d, name=name, v=variant, cls=cls: compare_series(
                f"series {name}[{v}]", gfs.build(name, {"x": X, "y": X, "z": X - 1, "q": 2 * X + 2}, variant=v),
                f"dp degrees {cls}", d), printed=_displayed_only(name, variant))
        if name == "e_u":
            d1 = _at_z1(d)
            for variant in gfs.CATALOG["e_u_at1"].variants:
                s.check(f"dp=e_u_at1[{variant}]", lambda d1=d1, v=variant: compare_series(
                    f"series e_u_at1[{v}]", gfs.build("e_u_at1", {"x": X, "y": X, "q": 2 * X + 2}, variant=v),
                    "dp degrees CPu at z=1", d1), printed=_displayed_only("e_u_at1", variant))
    d = dp_series("degrees", "CP", x_box=X, y_box=X)
    s.check("dp=e_full", lambda: compare_series(
        "series e_full", gfs.build("e_full", {"x": X, "y": X, "q": 2 * X + 2}), "dp degrees CP", d))
    da = dp_series("degrees", "CP", x_box=X, y_box=X, all_degrees=True)
    s.check("dp=d_full", lambda: compare_series(
        "series d_full", gfs.build("d_full", dict(zip(("x", "y", "q", "p", "t"), da.box))),
        "dp degrees CP (d2, d3, d4)", da))


def _outer(s: _Suite, n: int):
    max_o = 13
    oc = _outer_census(max_o).counts()
    s.check("census_by_outer=displayed q-series", lambda: compare_sequences(
        f"census by outer sites (o<={max_o})", oc, "displayed q-series", PRINTED_OUTER_SERIES), printed=True)
    for variant in gfs.CATALOG["j_outer_uni"].variants:
        s.check(f"census_by_outer=j_outer_uni[{variant}]", lambda v=variant: compare_sequences(
            f"census by outer sites (o<={max_o})", oc, f"series j_outer_uni[{v}]",
            _uni(gfs.build("j_outer_uni", {"q": max_o}, variant=v), 4, max_o)), printed=_displayed_only("j_outer_uni", variant))
    totals = _census(n, "CP", ("o",)).totals("o")
    for variant in gfs.CATALOG["j_dq_uni"].variants:
        s.check(f"census=j_dq_uni[{variant}]", lambda v=variant: compare_sequences(
            f"census(CP, sp<={n}) outer totals", totals, f"series j_dq_uni[{v}]",
            _uni(gfs.build("j_dq_uni", {"x": n}, variant=v), 2, n)), printed=_displayed_only("j_dq_uni", variant))
    rng = range(5, n + 1)
    s.check("census=total_outer", lambda: compare_sequences(
        f"census(CP, sp<={n}) outer totals", {k: totals[k] for k in rng}, "formula total_outer (oracle)",
        {k: formulas.exact("total_outer", k) for k in rng}))
    s.check("census=total_outer_fit", lambda: compare_sequences(
        f"census(CP, sp<={n}) outer totals", {k: totals[k] for k in rng}, "formula total_outer_fit",
        {k: formulas.exact("total_outer_fit", k) for k in rng}))

    def quarantine():
        r = formulas.total_outer_report(5)
        ok = (not r.display_integral) and r.oracle == totals[5] and formulas.exact("total_outer", 5) == r.oracle
        return ok, r.describe()
    s.check("total_outer quarantine at n=5", quarantine)

    X = min(n, 5)
    for cls, name in (("CPbu", "j_bu"), ("CPu", "j_u")):
        d = dp_series("outer", cls, x_box=X, y_box=X, with_z=True)
        for variant in gfs.CATALOG[name].variants:
            s.check(f"dp={name}[{variant}]", lambda d=d, name=name, v=variant, cls=cls: compare_series(
                f"series {name}[{v}]", gfs.build(name, {"x": X, "y": X, "z": X - 1, "q": 4 * X}, variant=v),
                f"dp outer {cls}", d), printed=_displayed_only(name, variant))
    geo = dp_series("outer", "CP", x_box=X, y_box=X)
    printed_dp = dp_series("outer", "CP", x_box=X, y_box=X, outer_weights="printed")
    s.check("dp=j_full[corrected]", lambda: compare_series(
        "series j_full[corrected]", gfs.build("j_full", {"x": X, "y": X, "q": 4 * X}), "dp outer CP", geo))
    s.check("dp(printed weights)=j_full[printed_weights]", lambda: compare_series(
        "series j_full[printed_weights]", gfs.build("j_full", {"x": X, "y": X, "q": 4 * X}, variant="printed_weights"),
        "dp outer CP with printed case weights", printed_dp))
    s.check("dp=j_full[printed]", lambda: compare_series(
        "series j_full[printed]", gfs.build("j_full", {"x": X, "y": X, "q": 4 * X}, variant="printed"),
        "dp outer CP", geo), printed=True)
    m = min(n, 10)
    s.check("census=dp(outer, printed weights)", lambda: _dp_report(dp_vs_bruteforce(
        "outer", m, "CP", outer_weights="printed")), printed=True)


def _dp_report(r) -> tuple[bool, str]:
    if r.ok:
        return True, f"dp = census on {r.compared} coefficients ({r.family}/{r.cls}, sp<={r.max_semiperimeter})"
    return False, r.first()


_RESIDUAL_BOXES = {
    "eqCPu2": {"x": 6, "y": 6, "z": 6},
    "eqacp1": {"x": 5, "y": 4},
    "eqaF22_q1": {"x": 6, "y": 6, "z": 6},
    "eqbD5": {"x": 4, "y": 4, "z": 3, "q": 8},
    "eqbD8": {"x": 4, "y": 3, "q": 8},
    "eqCu1": {"x": 4, "y": 4, "z": 3, "q": 10},
}

# the closed form each equation is solved by, when it has variants
_RESIDUAL_ENTRY = {"eqaF22_q1": "f_u_z1", "eqbD5": "e_u", "eqbD8": "e_u", "eqCu1": "j_u"}


def _residual(eq: str, variant: str | None, perturb: bool = False) -> tuple[bool, str]:
    box = _RESIDUAL_BOXES[eq]
    r = gfs.kernel_residual(eq, box, perturb=perturb, variant=variant)
    where = dict(zip(r.vars, r.box))
    label = f"residual {eq}" + (f" with {_RESIDUAL_ENTRY[eq]}[{variant}]" if variant else "")
    if r.is_zero():
        return True, f"{label} is zero on box {where}"
    return False, f"{label} has {len(r.support())} nonzero coefficients on box {where}"


def _kernels(s: _Suite, n: int):
    for eq in gfs.EQUATIONS:
        s.check(f"residual {eq}", lambda eq=eq: _residual(eq, None))
        s.check(f"residual {eq} detects a perturbation", lambda eq=eq: _negate(_residual(eq, None, perturb=True)))
        entry = _RESIDUAL_ENTRY.get(eq)
        if entry is not None:
            s.check(f"residual {eq} with displayed {entry}", lambda eq=eq: _residual(eq, "printed"), printed=True)
    for name, (vars, _, _) in gfs.ALGEBRAIC_POINTS.items():
        box = {v: (8 if v == "s" else 5) for v in vars}
        s.check(f"root {name}", lambda name=name, box=box: _zero(
            gfs.algebraic_point_residual(name, box), f"defining polynomial of {name}"))


def _negate(res: tuple[bool, str]) -> tuple[bool, str]:
    ok, detail = res
    return (not ok), ("perturbation detected: " + detail) if not ok else ("perturbation missed: " + detail)


def _zero(a: TruncatedSeries, label: str) -> tuple[bool, str]:
    where = dict(zip(a.vars, a.box))
    if a.is_zero():
        return True, f"{label} vanishes on box {where}"
    return False, f"{label} has {len(a.support())} nonzero coefficients on box {where}"


def _identities(s: _Suite, n: int):
    m = min(n, 12)
    for family in FAMILIES:
        for cls in ("CP", "CPu", "CPbu"):
            s.check(f"census=dp({family}, {cls})", lambda f=family, c=cls: _dp_report(dp_vs_bruteforce(f, m, c)))
    X = min(n, 8)
    half = gfs.build("cp_halfperimeter", {"x": X})
    s.check("cp_xy(y:=x)=cp_halfperimeter", lambda: compare_series(
        "series cp_xy at y:=x", gfs.at_diagonal(gfs.build("cp_xy", {"x": X, "y": X})), "series cp_halfperimeter", half))
    s.check("f_at_11=cp_xy", lambda: compare_series(
        "series f_at_11", gfs.build("f_at_11", {"x": X, "y": X}), "series cp_xy", gfs.build("cp_xy", {"x": X, "y": X})))
    s.check("j_full(q:=1, y:=x)=cp_halfperimeter", lambda: compare_series(
        "series j_semi at q=1", substitute(gfs.build("j_semi", {"x": X, "q": 2 * X}), "q", 1,
                                         bound=DegreeBound(0, x=2)),
        "series cp_halfperimeter", half))
    s.check("build(B) truncated = build(B')", lambda: compare_series(
        "cpu_z at box 6", gfs.build("cpu_z", {"x": 6, "y": 6, "z": 5}).truncate((4, 4, 3)),
        "cpu_z at box 4", gfs.build("cpu_z", {"x": 4, "y": 4, "z": 3})))


_SUITE_FUNCS = {
    "perimeter": _perimeter,
    "interior": _interior,
    "degrees": _degrees,
    "outer": _outer,
    "kernels": _kernels,
    "identities": _identities,
}


def run_suite(name: str, max_n: int = 12, include_printed: bool = True) -> list[CheckResult]:
    """Run one verification suite up to semiperimeter ``max_n``."""
    if name not in _SUITE_FUNCS:
        raise UnknownName(f"unknown suite {name!r}; known: {', '.join(SUITES)}, all")
    s = _Suite(name, include_printed)
    _SUITE_FUNCS[name](s, max_n)
    return s.results


def run_all(max_n: int = 12, include_printed: bool = True) -> list[CheckResult]:
    out = []
    for name in SUITES:
        out.extend(run_suite(name, max_n, include_printed))
    return out
