"""Acceptance criteria 1-10.

Each test is tagged with the criterion it exercises; the run ends with one
PASS/FAIL line per criterion (see conftest.py).  Clauses that do not hold for
the displayed closed forms keep their original assertions under a strict
xfail, so they report FAIL and would turn red if they ever started to pass.

Run alone with ``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import sys
from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from convexpoly import formulas as F
from convexpoly import gfs, verify
from convexpoly.cli import run
from convexpoly.enumerator import census
from convexpoly.geometry import cells_of, compute_stats, figure1_path, read_polyomino
from convexpoly.series import (
    DegreeBound,
    TruncatedSeries as T,
    derive,
    dump,
    eval_expr,
    exact_div,
    invert_unit,
    load,
    parse_expr,
    sqrt_unit,
    substitute,
)

MAX_SP = 12


@pytest.fixture(scope="session")
def check():
    """Look up one verification check, running each suite once per session."""
    cache: dict[str, dict[str, verify.CheckResult]] = {}

    def get(suite: str, name: str) -> verify.CheckResult:
        if suite not in cache:
            cache[suite] = {r.name: r for r in verify.run_suite(suite, MAX_SP)}
        return cache[suite][name]

    return get


def passes(check, suite, name):
    r = check(suite, name)
    assert r.ok, r.detail


def unattainable(reason: str):
    return pytest.mark.xfail(strict=True, reason=reason)


# -- 1. perimeter counts ------------------------------------------------------------------

@pytest.mark.criterion(1)
def test_c1_census_equals_count_formula(check):
    passes(check, "perimeter", "census=count_perimeter")
    assert census(4).rows[4].count == F.exact("count_perimeter", 4) == 7


@pytest.mark.criterion(1)
def test_c1_census_equals_half_perimeter_series(check):
    passes(check, "perimeter", "census=cp_halfperimeter[corrected]")


@pytest.mark.criterion(1)
@unattainable("the displayed half-perimeter closed form expands to 27 at n=5; the census and the count formula give 28")
def test_c1_census_equals_displayed_half_perimeter_form(check):
    passes(check, "perimeter", "census=cp_halfperimeter[printed]")


# -- 2. subclass counts ---------------------------------------------------------------------

@pytest.mark.criterion(2)
@pytest.mark.parametrize("name", [
    "census=count_cpbu", "census=dp(CPbu)", "census=cpbu_z",
    "census=count_cpu", "census=dp(CPu)", "census=cpu_z",
])
def test_c2_subclass_counts(check, name):
    passes(check, "perimeter", name)


# -- 3. interior vertices --------------------------------------------------------------------

@pytest.mark.criterion(3)
@pytest.mark.parametrize("name", ["census=total_interior", "census=f_dq_uni"])
def test_c3_interior_totals(check, name):
    passes(check, "interior", name)


@pytest.mark.criterion(3)
def test_c3_anchor():
    assert census(5, "CP", ("int",)).rows[5].totals["int"] == F.exact("total_interior", 5) == 12


# -- 4. degree statistics ------------------------------------------------------------------------

@pytest.mark.criterion(4)
@pytest.mark.parametrize("name", [
    "census=total_deg2",
    "census=e_dq_uni",
    "per-polyomino degree identities",
    "histogram(d2+d3)=d_deg23",
    "histogram(d2+d3=n)=histogram(d3+d4=n-4)",
])
def test_c4_degree_statistics(check, name):
    passes(check, "degrees", name)


# -- 5. outer-site perimeter -----------------------------------------------------------------------

@pytest.mark.criterion(5)
@unattainable("the census gives 12 polyominoes with 8 outer sites where the displayed q-series has 10")
def test_c5_census_by_outer_equals_displayed_series(check):
    passes(check, "outer", "census_by_outer=displayed q-series")


@pytest.mark.criterion(5)
@unattainable("the displayed outer-site total series gives 250 at n=5; the census gives 248")
def test_c5_displayed_outer_totals_equal_census(check):
    passes(check, "outer", "census=j_dq_uni[printed]")


@pytest.mark.criterion(5)
def test_c5_corrected_outer_totals_equal_census(check):
    passes(check, "outer", "census=j_dq_uni[corrected]")
    passes(check, "outer", "census_by_outer=j_outer_uni[corrected]")


@pytest.mark.criterion(5)
def test_c5_total_outer_display_is_quarantined(check):
    passes(check, "outer", "total_outer quarantine at n=5")
    r = F.total_outer_report(5)
    assert r.display == Fraction(1220, 3) and not r.display_integral
    assert F.exact("total_outer", 5) == r.oracle == 248


# -- 6. kernel residuals -----------------------------------------------------------------------------

@pytest.mark.criterion(6)
@pytest.mark.parametrize("equation", sorted(gfs.EQUATIONS))
def test_c6_residual_vanishes(check, equation):
    assert sum(verify._RESIDUAL_BOXES[equation].values()) >= 8
    passes(check, "kernels", f"residual {equation}")
    passes(check, "kernels", f"residual {equation} detects a perturbation")


@pytest.mark.criterion(6)
def test_c6_residual_with_displayed_corner_series(check):
    # the displayed convex-corner series solves the equation as displayed
    passes(check, "kernels", "residual eqbD5 with displayed e_u")


@pytest.mark.criterion(6)
@pytest.mark.parametrize("name", [
    pytest.param("residual eqaF22_q1 with displayed f_u_z1", marks=unattainable(
        "the displayed unit-weight interior series lacks a kernel factor and has negative coefficients")),
    pytest.param("residual eqbD8 with displayed e_u", marks=unattainable(
        "the displayed convex-corner series carries a kernel sign typo; the two-root equation is not divisible")),
    pytest.param("residual eqCu1 with displayed j_u", marks=unattainable(
        "the displayed top-staircase outer-site series uses the wrong square-root radicand")),
])
def test_c6_residual_with_displayed_forms(check, name):
    passes(check, "kernels", name)


@pytest.mark.criterion(6)
def test_c6_substitution_points(check):
    for name in gfs.ALGEBRAIC_POINTS:
        passes(check, "kernels", f"root {name}")


# -- 7. oracle triangle -------------------------------------------------------------------------------

TRIANGLE = [("identities", f"census=dp({f}, {c})")
            for f in ("perimeter_area", "interior", "degrees", "outer") for c in ("CP", "CPu", "CPbu")] + [
    ("perimeter", "census=dp(perimeter)"),
    ("perimeter", "census=cp_xy(y:=x)"),
    ("interior", "dp=f_dq"),
    ("interior", "dp=f_u_dq"),
    ("interior", "dp=f_u_z1[corrected]"),
    ("interior", "dp=f_at_11"),
    ("interior", "dp=f_dz"),
    ("degrees", "dp=e_bu[printed]"),
    ("degrees", "dp=e_u[corrected]"),
    ("degrees", "dp=e_u_at1[corrected]"),
    ("degrees", "dp=e_full"),
    ("degrees", "dp=d_full"),
    ("outer", "dp=j_bu[printed]"),
    ("outer", "dp=j_u[corrected]"),
    ("outer", "dp=j_full[corrected]"),
    ("outer", "dp(printed weights)=j_full[printed_weights]"),
]


@pytest.mark.criterion(7)
@pytest.mark.parametrize("suite, name", TRIANGLE, ids=[n for _, n in TRIANGLE])
def test_c7_oracle_triangle(check, suite, name):
    passes(check, suite, name)


# -- 8. asymptotics ------------------------------------------------------------------------------------

def converges(target, n_range, source, tol, variant=None):
    rows = F.convergence_report(target, n_range, source, variant)
    assert rows[-1].n >= n_range[-1] - 1
    assert rows[-1].error < tol, f"{target}: ratio {float(rows[-1].ratio)} at n={rows[-1].n}"
    assert F.tail_non_increasing(rows), f"{target}: tail of |ratio - 1| increases"


@pytest.mark.criterion(8)
@pytest.mark.parametrize("target", ["avg_interior", "avg_deg2"])
def test_c8_formula_backed(target):
    converges(target, range(5, 606), "formula", 1e-2)


@pytest.mark.criterion(8)
@unattainable("the census-verified mean number of outer sites grows like 3n/2; the ratio is 0.957 at n=605")
def test_c8_avg_outer_given_perimeter():
    converges("avg_outer_given_perimeter", range(5, 606), "formula", 1e-2)


@pytest.mark.criterion(8)
@unattainable("the second-order term is too small for n near 60: ratio 0.716 at n=60")
def test_c8_count_deg23():
    converges("count_deg23", range(4, 61), "series", 1e-1)


@pytest.mark.criterion(8)
@unattainable("the census-verified outer-site counts grow faster than the stated exponential; ratio 6.7 at n=60")
def test_c8_count_outer():
    converges("count_outer", range(4, 61), "series", 1e-1)


# -- 9. series-engine properties ----------------------------------------------------------------------

XY = ("x", "y")
BOX = (4, 3)
EXAMPLES = settings(max_examples=200)
coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)


@st.composite
def series(draw, unit=False):
    terms = draw(st.dictionaries(st.tuples(*(st.integers(0, b) for b in BOX)), coef, max_size=8))
    if unit:
        terms[(0,) * len(BOX)] = Fraction(1)
    return T(XY, BOX, terms)


def naive_mul(a: T, b: T) -> T:
    out = {}
    for ea, ca in a.coeffs.items():
        for eb, cb in b.coeffs.items():
            e = tuple(i + j for i, j in zip(ea, eb))
            if all(k <= m for k, m in zip(e, a.box)):
                out[e] = out.get(e, 0) + ca * cb
    return T(a.vars, a.box, out)


@pytest.mark.criterion(9)
@EXAMPLES
@given(series(), series(), series())
def test_c9_ring_laws(a, b, c):
    assert a + b == b + a
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert (a - a).is_zero()
    assert a * T.one(XY, BOX) == a


@pytest.mark.criterion(9)
@EXAMPLES
@given(series(), series())
def test_c9_product_matches_naive_convolution(a, b):
    assert a * b == naive_mul(a, b)


@pytest.mark.criterion(9)
@EXAMPLES
@given(series(unit=True))
def test_c9_invert_round_trip(a):
    assert a * invert_unit(a) == T.one(XY, BOX)


@pytest.mark.criterion(9)
@EXAMPLES
@given(series(unit=True))
def test_c9_sqrt_round_trips(a):
    r = sqrt_unit(a)
    assert r * r == a
    assert sqrt_unit(a * a) == a


@pytest.mark.criterion(9)
@EXAMPLES
@given(series(), series(unit=True))
def test_c9_division_round_trip(a, b):
    assert (a / b) * b == a
    assert exact_div(a * b, b) == a


@pytest.mark.criterion(9)
@EXAMPLES
@given(series(), series())
def test_c9_substitution_is_a_ring_map(a, b):
    assert substitute(a * b, "y", "x") == substitute(a, "y", "x") * substitute(b, "y", "x")
    assert substitute(a + b, "y", "x") == substitute(a, "y", "x") + substitute(b, "y", "x")
    two_x = T.monomial(XY, BOX, {"x": 1}, 2)
    assert substitute(a * b, "x", two_x) == substitute(a, "x", two_x) * substitute(b, "x", two_x)


@pytest.mark.criterion(9)
@EXAMPLES
@given(series(), series())
def test_c9_evaluation_at_one_is_a_ring_map(a, b):
    # y-degree <= 1 factors keep the product inside the box, so y := 1 is exact
    at1 = lambda s: substitute(s, "y", 1, bound=DegreeBound(BOX[1]))
    low = lambda s: T(XY, BOX, {e: c for e, c in s.coeffs.items() if e[1] <= 1})
    a, b = low(a), low(b)
    assert at1(a * b) == at1(a) * at1(b)
    assert at1(a + b) == at1(a) + at1(b)


@pytest.mark.criterion(9)
@EXAMPLES
@given(series(), series())
def test_c9_derivative_product_rule(a, b):
    d = lambda s: derive(s, "x")
    lhs = d(a * b)
    assert lhs == d(a) * b.truncate(lhs.box) + a.truncate(lhs.box) * d(b)


@pytest.mark.criterion(9)
@EXAMPLES
@given(series())
def test_c9_dump_load_round_trip(a):
    assert load(dump(a)) == a


@pytest.mark.criterion(9)
def test_c9_golden_prefixes():
    c = eval_expr(parse_expr("(1-sqrt(1-4*x))/(2*x)"), ("x",), (9,))
    assert [c.coeff((n,)) for n in range(9)] == [comb(2 * n, n) // (n + 1) for n in range(9)]
    assert c.coeff((4,)) == 14
    r = eval_expr(parse_expr("sqrt(1-4*x)"), ("x",), (6,))
    assert [r.coeff((n,)) for n in range(5)] == [1, -2, -2, -4, -10]


# -- 10. Figure 1 regression ------------------------------------------------------------------------

@pytest.mark.criterion(10)
def test_c10_figure1_file(capsys):
    p = read_polyomino(figure1_path().read_text())
    s = compute_stats(p)
    assert len(cells_of(p)) == s.a == 22
    assert (s.o, s.interior, s.d2, s.d4) == (18, 11, 10, 6)
    assert run(["stats", "--in", str(figure1_path()), "--format", "json"]) == 0
    assert '"o": 18' in capsys.readouterr().out


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
