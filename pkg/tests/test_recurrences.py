from math import comb

import pytest

from convexpoly.errors import InconsistentBounds
from convexpoly.formulas import fibonacci
from convexpoly.recurrences import (
    CLASSES,
    dp_series,
    dp_vs_bruteforce,
    placements,
    rest_class,
    transition_table,
)

PRINTED_OUTER = [1, 0, 2, 4, 10, 28, 77, 208, 586, 1572]
CENSUS_OUTER = [1, 0, 2, 4, 12, 32, 102, 276, 849, 2364]


def by_semiperimeter(d, top, stat=None):
    out = [0] * (top + 1)
    for (v, h, *marks), c in d.coeffs.items():
        if v + h <= top:
            out[v + h] += c if stat is None else c * marks[0]
    return out


def by_outer_sites(weights):
    # o <= 13 forces v + h <= 11, so v, h <= 10
    d = dp_series("outer", "CP", x_box=10, y_box=10, outer_weights=weights)
    out = [0] * 14
    for (v, h, o), c in d.coeffs.items():
        if o <= 13 and v + h <= 11:
            out[o] += c
    return out[4:]


def test_placements_cover_every_connected_offset():
    ps = list(placements(3, 2))
    assert len(ps) == 4 and all(p.overlap >= 1 for p in ps)
    assert all(rest_class("CPbu", p) in (None, "CPbu") for p in ps)


def test_transition_tables_cover_all_classes():
    for cls in CLASSES:
        rows = transition_table("perimeter_area", cls, 4)
        assert rows and all(r.multiplicity >= 1 for r in rows)


def test_subclass_counts():
    bu = by_semiperimeter(dp_series("perimeter_area", "CPbu", x_box=10, y_box=10), 10)
    assert bu[2:] == [fibonacci(2 * n - 3) for n in range(2, 11)]
    u = by_semiperimeter(dp_series("perimeter_area", "CPu", x_box=10, y_box=10), 10)
    assert u[2:] == [comb(2 * n - 4, n - 2) for n in range(2, 11)]


def test_interior_total_at_five():
    assert by_semiperimeter(dp_series("interior", "CP", x_box=5, y_box=5), 5, stat=True)[5] == 12


def test_outer_sites_by_weight_scheme():
    assert by_outer_sites("geometric") == CENSUS_OUTER
    # the printed case weights reproduce the displayed q-series instead
    assert by_outer_sites("printed") == PRINTED_OUTER


@pytest.mark.parametrize("family, n", [("perimeter_area", 10), ("interior", 9), ("degrees", 9), ("outer", 9)])
def test_dp_matches_census(family, n):
    r = dp_vs_bruteforce(family, n)
    assert r.ok, r.first()
    assert r.compared > 0


def test_printed_outer_weights_disagree_with_census():
    r = dp_vs_bruteforce("outer", 8, outer_weights="printed")
    assert r.mismatches[0] == ((2, 3, 8), 3, 4)


def test_mark_box_must_hold_lowered_marks():
    with pytest.raises(InconsistentBounds):
        dp_series("degrees", "CP", x_box=4, y_box=4, mark_box=2, all_degrees=True)
    with pytest.raises(InconsistentBounds):
        dp_series("outer", "CP", x_box=4, y_box=3, max_k=5)
