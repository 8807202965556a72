import json

import pytest
from hypothesis import given, strategies as st

from convexpoly.errors import BadSpan, BrokenAdjacency, EmptyInput, InvalidPolyomino, NotRowConvex
from convexpoly.geometry import (
    FIGURE1_SPANS,
    cells_of,
    class_flags,
    compute_stats,
    figure1_path,
    from_cells,
    from_columns,
    from_json,
    from_text,
    mirror,
    read_polyomino,
    to_json,
    to_text,
)


def test_single_cell_statistics():
    s = compute_stats(from_columns([(0, 0)]))
    assert (s.v, s.h, s.a, s.c, s.perimeter, s.interior, s.d2, s.d3, s.d4, s.o) == (1, 1, 1, 0, 4, 0, 4, 0, 0, 4)


def test_square_statistics():
    s = compute_stats(from_columns([(0, 1), (0, 1)]))
    assert (s.interior, s.d2, s.d3, s.d4, s.o) == (1, 4, 4, 0, 8)


def test_figure1_statistics():
    p = from_columns(FIGURE1_SPANS)
    s = compute_stats(p)
    assert (s.a, s.v, s.h, s.perimeter, s.o, s.interior, s.d2, s.d3, s.d4) == (22, 5, 7, 24, 18, 11, 10, 8, 6)
    assert s.horizontal_perimeter == 10 and s.vertical_perimeter == 14
    assert len(cells_of(p)) == 22


def test_class_flags():
    f = class_flags(from_columns([(0, 0)]))
    assert f.is_u and f.is_b and f.is_bu
    f = class_flags(from_columns([(0, 1), (0, 0)]))
    assert f.is_u and f.is_b
    f = class_flags(from_columns(FIGURE1_SPANS))
    assert not (f.is_u or f.is_b or f.is_bu)


@pytest.mark.parametrize("spans, error", [
    ([(0, 0), (2, 3)], BrokenAdjacency),
    ([(0, 0), (1, 2), (0, 0)], NotRowConvex),
    ([(1, 0)], BadSpan),
    ([], EmptyInput),
])
def test_invalid_spans(spans, error):
    with pytest.raises(error):
        from_columns(spans)


def test_cells():
    assert cells_of(from_columns([(0, 0)])) == {(0, 0)}
    assert cells_of(from_columns([(0, 1)])) == {(0, 0), (0, 1)}


def test_text_and_json_formats_round_trip():
    p = from_columns(FIGURE1_SPANS)
    assert from_text(to_text(p)) == p
    assert from_json(to_json(p)) == p
    assert read_polyomino(to_json(p)) == p
    assert read_polyomino(to_text(p)) == p
    assert json.loads(to_json(p))["cells"][0] == [0, 0]


def test_bundled_figure1_file():
    assert read_polyomino(figure1_path().read_text()) == from_columns(FIGURE1_SPANS)


def test_malformed_text():
    with pytest.raises(InvalidPolyomino):
        from_text("0 0\n")
    with pytest.raises(InvalidPolyomino):
        from_text("0 0 1\n2 0 1\n")
    with pytest.raises(InvalidPolyomino):
        from_json('{"cells": [[0, 0], [2, 0]]}')


@st.composite
def convex_spans(draw):
    n = draw(st.integers(1, 6))
    spans = [tuple(sorted(draw(st.tuples(st.integers(-3, 3), st.integers(-3, 3)))))]
    for _ in range(n - 1):
        b, u = spans[-1]
        nb = draw(st.integers(-4, u))
        nu = draw(st.integers(max(nb, b), 5))
        spans.append((nb, nu))
    return spans


@given(convex_spans())
def test_statistic_identities(spans):
    try:
        p = from_columns(spans)
    except InvalidPolyomino:
        return
    s = compute_stats(p)
    assert s.d4 == s.d2 - 4
    assert s.d2 + s.d3 + s.d4 == 2 * (s.v + s.h)
    assert s.perimeter == 2 * (s.v + s.h)
    assert from_cells(cells_of(p)) == p
    assert compute_stats(mirror(p)) == s
