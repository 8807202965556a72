from collections import Counter
from itertools import product

import pytest

from convexpoly.enumerator import (
    census,
    census_by_outer,
    certified_max_grade,
    enumerate_polyominoes,
    enumerate_with_stats,
    histogram,
    joint_counts,
)
from convexpoly.errors import BudgetTooSmall, InvalidPolyomino, UncertifiableRange, UnknownStatistic
from convexpoly.geometry import class_flags, compute_stats, from_columns


def naive_polyominoes(max_sp):
    """Every normalized span sequence with v + h <= max_sp that validates."""
    out = set()
    for v in range(1, max_sp):
        hmax = max_sp - v
        ranges = [(b, u) for b in range(-hmax, hmax) for u in range(b, b + hmax)]
        for spans in product(ranges, repeat=v):
            if spans[0][0] != 0:
                continue
            try:
                p = from_columns(spans)
            except InvalidPolyomino:
                continue
            if compute_stats(p).semiperimeter <= max_sp:
                out.add(p)
    return out


def test_enumeration_matches_naive_search():
    got = list(enumerate_polyominoes(6))
    assert len(got) == len(set(got))
    assert set(got) == naive_polyominoes(6)


@pytest.mark.parametrize("cls, flag", [("CPu", "is_u"), ("CPb", "is_b"), ("CPbu", "is_bu")])
def test_subclass_enumeration(cls, flag):
    every = [p for p in enumerate_polyominoes(7) if getattr(class_flags(p), flag)]
    assert sorted(map(repr, enumerate_polyominoes(7, cls))) == sorted(map(repr, every))


def test_small_censuses():
    assert census(2).counts() == {2: 1}
    assert sum(census(4).counts().values()) == 10
    assert census(4, "CPbu").counts() == {2: 1, 3: 2, 4: 5}


def test_census_totals():
    t = census(5, "CP", ("int", "d2"))
    assert t.rows[4].totals["int"] == 1
    assert (t.rows[5].count, t.rows[5].totals["int"]) == (28, 12)
    assert t.rows[2].totals["d2"] == 4


def test_census_threads_agree():
    assert census(9, "CP", ("o",), threads=2).to_csv() == census(9, "CP", ("o",)).to_csv()


def test_census_by_outer_printed_prefix():
    c = census_by_outer(10).counts()
    assert (c[4], c[5], c[6], c[9], c[10]) == (1, 0, 2, 32, 102)


def test_histograms():
    h = histogram(8, "d2+d3")
    assert h[4] == 1
    assert h.certified == (0, certified_max_grade("d2+d3", 8))
    with pytest.raises(UncertifiableRange):
        h[11]
    with pytest.raises(UncertifiableRange):
        histogram(8, "int")[3]
    with pytest.raises(UnknownStatistic):
        histogram(8, "x")


def test_histogram_shift_identity():
    a, b = histogram(10, "d2+d3"), histogram(10, "d3+d4")
    for n in range(4, 9):
        assert a[n] == b[n - 4]


def test_joint_counts_match_stats():
    joint = joint_counts(6, "CP", ("v", "h", "o"))
    direct = Counter((s.v, s.h, s.o) for _, s in enumerate_with_stats(6))
    assert joint == direct


def test_budget_validation():
    with pytest.raises(BudgetTooSmall):
        census(1)
