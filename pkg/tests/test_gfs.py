from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from convexpoly import gfs
from convexpoly.enumerator import enumerate_with_stats
from convexpoly.errors import UnknownName
from convexpoly.formulas import exact, fibonacci
from convexpoly.series import DegreeBound, TruncatedSeries, substitute

PRINTED_OUTER = [1, 0, 2, 4, 10, 28, 77, 208, 586, 1572]
CENSUS_OUTER = [1, 0, 2, 4, 12, 32, 102, 276, 849, 2364]


def uni(a, lo, hi):
    return [a.coeff((k,)) for k in range(lo, hi + 1)]


def test_catalog_is_complete():
    expected = {"cp_halfperimeter", "cpbu_z", "cpbu_area", "cpu_z", "cp_xy", "f_u_z1", "f_u_dq", "f_at_11",
                "f_dz", "f_dq", "f_dq_uni", "e_bu", "e_u", "e_u_at1", "e_full", "d_full", "d_deg23", "e_dq_uni",
                "j_bu", "j_u", "j_full", "j_outer_uni", "j_dq_uni"}
    assert expected <= set(gfs.catalog_names())
    for entry in gfs.CATALOG.values():
        assert entry.description and entry.default_variant == entry.variants[0]


def test_unknown_names():
    with pytest.raises(UnknownName):
        gfs.build("nope", {"x": 3})
    with pytest.raises(UnknownName):
        gfs.build("cp_xy", {"x": 3, "y": 3}, variant="printed_weights")
    with pytest.raises(UnknownName):
        gfs.kernel_residual("eqXYZ", {"x": 3})


def test_half_perimeter_series():
    assert uni(gfs.build("cp_halfperimeter", {"x": 9}), 2, 9) == [1, 2, 7, 28, 120, 528, 2344, 10416]
    # the displayed closed form, verbatim, drifts from n = 5
    assert uni(gfs.build("cp_halfperimeter", {"x": 9}, variant="printed"), 2, 7) == [1, 2, 7, 27, 110, 460]


def test_subclass_series():
    bu = gfs.at_diagonal(substitute(gfs.build("cpbu_z", {"x": 10, "y": 10, "z": 10}), "z", 1,
                                    bound=DegreeBound(-1, y=1)))
    assert uni(bu, 2, 10) == [fibonacci(2 * n - 3) for n in range(2, 11)]
    u = gfs.at_diagonal(substitute(gfs.build("cpu_z", {"x": 10, "y": 10, "z": 10}), "z", 1,
                                   bound=DegreeBound(-1, y=1)))
    assert uni(u, 2, 10) == [comb(2 * n - 4, n - 2) for n in range(2, 11)]


def test_univariate_totals():
    assert gfs.build("f_dq_uni", {"x": 10}).coeff((5,)) == 12
    assert uni(gfs.build("e_dq_uni", {"x": 12}), 5, 12) == [exact("total_deg2", n) for n in range(5, 13)]


def test_outer_site_series():
    assert uni(gfs.build("j_outer_uni", {"q": 13}, variant="printed"), 4, 13) == PRINTED_OUTER
    assert uni(gfs.build("j_outer_uni", {"q": 13}), 4, 13) == CENSUS_OUTER
    assert uni(gfs.build("j_dq_uni", {"x": 9}), 2, 9) == [4, 12, 52, 248, 1232, 6176, 30808, 152096]
    assert uni(gfs.build("j_dq_uni", {"x": 8}, variant="printed"), 5, 8) == [250, 1252, 6314, 31636]


def test_degree_three_series_regrading():
    assert uni(gfs.deg23_series(14), 0, 14) == uni(gfs.build("d_deg23", {"q": 14}), 0, 14)
    assert uni(gfs.build("d_deg23", {"q": 13}), 4, 13) == CENSUS_OUTER


def test_outer_sites_equal_degree_two_plus_three():
    # explains why the outer-site and degree<=3 series coincide
    assert all(s.o == s.d2 + s.d3 for _, s in enumerate_with_stats(9))


def test_corrected_outer_total_matches_fitted_closed_form():
    j = gfs.build("j_dq_uni", {"x": 24})
    assert uni(j, 5, 24) == [exact("total_outer_fit", n) for n in range(5, 25)]


def test_algebraic_points():
    z0 = gfs.algebraic_point("z0", {"x": 5, "y": 5})
    assert uni(gfs.at_diagonal(z0), 0, 4) == [1, 1, 2, 5, 14]
    zp = gfs.algebraic_point("z_plus", {"s": 6})
    one = TruncatedSeries.one(("s",), (6,))
    assert zp * (one + TruncatedSeries.var(("s",), (6,), "s")) == one
    for name in gfs.ALGEBRAIC_POINTS:
        box = {v: (6 if v == "s" else 4) for v in gfs.ALGEBRAIC_POINTS[name][0]}
        assert gfs.algebraic_point_residual(name, box).is_zero(), name


def test_full_outer_series_specializes_to_half_perimeter():
    j = substitute(gfs.build("j_semi", {"x": 7, "q": 14}), "q", 1, bound=DegreeBound(0, x=2))
    assert j == gfs.build("cp_halfperimeter", {"x": 7})


@settings(max_examples=15)
@given(st.integers(2, 6), st.integers(2, 6), st.integers(1, 5))
def test_build_is_truncation_consistent(x, y, z):
    big = gfs.build("cpu_z", {"x": 7, "y": 7, "z": 6})
    assert gfs.build("cpu_z", {"x": x, "y": y, "z": z}) == big.truncate((x, y, z))


def test_residual_harness_detects_perturbation():
    assert gfs.kernel_residual("eqCPu2", {"x": 5, "y": 5, "z": 5}).is_zero()
    assert not gfs.kernel_residual("eqCPu2", {"x": 5, "y": 5, "z": 5}, perturb=True).is_zero()
