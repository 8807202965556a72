from fractions import Fraction

import mpmath
import pytest

from convexpoly import formulas as F
from convexpoly.enumerator import census
from convexpoly.errors import IntegralityViolation, OutOfDomain, SourceUnavailable, UnknownName


def test_exact_values():
    assert [F.exact("count_perimeter", n) for n in range(2, 7)] == [1, 2, 7, 28, 120]
    assert F.exact("count_perimeter_shifted", 0) == 7
    assert F.exact("total_interior", 5) == 12
    assert F.exact("count_cpbu", 4) == 5
    assert F.exact("count_cpu", 6) == 70
    assert [F.fibonacci(k) for k in range(10)] == [0, 1, 1, 2, 3, 5, 8, 13, 21, 34]


def test_formulas_match_census_up_to_ten():
    t = census(10, "CP", ("int", "d2", "o"))
    for n in range(5, 11):
        row = t.rows[n]
        assert F.exact("count_perimeter", n) == row.count
        assert F.exact("total_interior", n) == row.totals["int"]
        assert F.exact("total_deg2", n) == row.totals["d2"]
        assert F.exact("total_outer", n) == row.totals["o"]
        assert F.exact("total_outer_fit", n) == row.totals["o"]


def test_domains_and_integrality():
    with pytest.raises(OutOfDomain):
        F.exact("total_interior", 4)
    with pytest.raises(UnknownName):
        F.exact("nope", 5)
    assert F.exact_value("total_outer_display", 5) == Fraction(1220, 3)
    with pytest.raises(IntegralityViolation):
        F.exact("total_outer_display", 5)


def test_total_outer_quarantine_report():
    r = F.total_outer_report(5)
    assert not r.display_integral
    assert (r.binomial_restored, r.printed_series, r.oracle) == (250, 250, 248)
    assert "248" in r.describe()
    assert F.FORMULAS["total_outer"].quarantined


def test_asymptotic_expressions():
    with mpmath.workdps(30):
        assert abs(F.asymptotic("avg_deg2", 100) - 53) < 0.1
        c = F._consts()
        assert abs(c["phi2"] - (3 + mpmath.sqrt(5)) / 2) < mpmath.mpf(10) ** -25
        assert abs(F.asymptotic("avg_perimeter_given_outer", 40) / 40 - mpmath.root(5, 4)) < mpmath.mpf(10) ** -25
    with pytest.raises(UnknownName):
        F.asymptotic("nope", 10)
    with pytest.raises(OutOfDomain):
        F.asymptotic("avg_deg2", 0)


def test_formula_backed_convergence_to_two_thousand():
    rows = F.convergence_report("avg_interior", range(5, 2001))
    assert F.tail_non_increasing(rows)
    rows = F.convergence_report("avg_deg2", range(5, 2001))
    assert rows[-1].error < 1e-3


def test_printed_outer_count_drift_is_order_one_over_n():
    rows = F.convergence_report("count_outer", [30, 60], "series", "printed")
    scaled = [r.n * (1 - r.ratio) for r in rows]
    assert all(5 < s < 12 for s in scaled)


def test_census_and_series_sources_agree():
    a = F.convergence_report("avg_interior", range(5, 11), "census")
    b = F.convergence_report("avg_interior", range(5, 11), "series")
    assert [r.exact for r in a] == [r.exact for r in b]
    a = F.convergence_report("count_outer", range(4, 12), "census")
    b = F.convergence_report("count_outer", range(4, 12), "series")
    assert [r.exact for r in a] == [r.exact for r in b]


def test_source_errors():
    with pytest.raises(SourceUnavailable):
        F.convergence_report("count_deg23", range(4, 10), "formula")
    with pytest.raises(SourceUnavailable):
        F.convergence_report("avg_interior", range(5, 40), "census")
    with pytest.raises(SourceUnavailable):
        F.convergence_report("avg_interior", range(2, 10))
    with pytest.raises(UnknownName):
        F.convergence_report("nope", range(5, 10))
