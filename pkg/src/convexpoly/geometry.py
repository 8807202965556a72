"""Convex polyominoes as column-span sequences, and their statistics.

Coordinates: column ``i`` sits at ``x = i`` (first column at ``x = 0``), rows
grow upward, and the lattice vertex ``(i, j)`` is the lower-left corner of
cell ``(i, j)``.  A polyomino is stored translation-normalized so that the
bottom cell of its first column is ``(0, 0)``.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from dataclasses import dataclass, asdict
from typing import Iterable, Sequence

from .errors import BadSpan, BrokenAdjacency, EmptyInput, InvalidPolyomino, NotRowConvex

__all__ = [
    "ColumnSpan",
    "ConvexPolyomino",
    "StatVector",
    "ClassFlags",
    "from_columns",
    "compute_stats",
    "class_flags",
    "cells_of",
    "is_row_convex_direct",
    "is_unimodal",
    "boundary_edge_counts",
    "mirror",
    "to_text",
    "from_text",
    "to_json",
    "from_json",
    "from_cells",
    "read_polyomino",
    "FIGURE1_SPANS",
    "figure1_path",
]

# The 22-cell example used throughout the test-suite.
FIGURE1_SPANS = ((0, 1), (-2, 2), (-1, 4), (-1, 4), (1, 3))


@dataclass(frozen=True, order=True)
class ColumnSpan:
    b: int
    u: int

    def __post_init__(self):
        if self.b > self.u:
            raise BadSpan(f"column span has b={self.b} > u={self.u}")

    @property
    def height(self) -> int:
        return self.u - self.b + 1


@dataclass(frozen=True, order=True)
class ConvexPolyomino:
    columns: tuple[ColumnSpan, ...]

    @property
    def spans(self) -> tuple[tuple[int, int], ...]:
        return tuple((c.b, c.u) for c in self.columns)

    def __len__(self) -> int:
        return len(self.columns)

    def __repr__(self) -> str:
        return f"ConvexPolyomino({list(self.spans)})"


@dataclass(frozen=True)
class StatVector:
    v: int
    h: int
    a: int
    c: int
    perimeter: int
    semiperimeter: int
    interior: int
    d2: int
    d3: int
    d4: int
    o: int

    @property
    def horizontal_perimeter(self) -> int:
        """Number of horizontal boundary edges (two per column)."""
        return 2 * self.v

    @property
    def vertical_perimeter(self) -> int:
        """Number of vertical boundary edges (two per row)."""
        return 2 * self.h

    def as_dict(self) -> dict[str, int]:
        d = asdict(self)
        d["int"] = d.pop("interior")
        return d

    def __getitem__(self, name: str) -> int:
        if name == "int":
            return self.interior
        return getattr(self, name)


@dataclass(frozen=True)
class ClassFlags:
    is_u: bool
    is_b: bool
    is_bu: bool


def is_unimodal(bs: Sequence[int], us: Sequence[int]) -> bool:
    """True iff ``bs`` is valley-unimodal and ``us`` is mountain-unimodal."""

    def valley(seq):
        i, n = 0, len(seq)
        while i + 1 < n and seq[i + 1] <= seq[i]:
            i += 1
        while i + 1 < n and seq[i + 1] >= seq[i]:
            i += 1
        return i == n - 1

    return valley(list(bs)) and valley([-t for t in us])


def is_row_convex_direct(cells: Iterable[tuple[int, int]]) -> bool:
    """Check that every occupied row is a contiguous run of columns."""
    rows: dict[int, list[int]] = {}
    for x, y in cells:
        rows.setdefault(y, []).append(x)
    return all(max(xs) - min(xs) + 1 == len(xs) for xs in rows.values())


def from_columns(spans: Sequence[tuple[int, int]]) -> ConvexPolyomino:
    """Validate ``(b, u)`` pairs and return the normalized polyomino."""
    spans = [tuple(s) for s in spans]
    if not spans:
        raise EmptyInput("a polyomino needs at least one column")
    for b, u in spans:
        if b > u:
            raise BadSpan(f"column span ({b}, {u}) has b > u")
    bs = [b for b, _ in spans]
    us = [u for _, u in spans]
    # a profile that is not unimodal is rejected as non-convex even when the
    # columns are also disconnected
    if not is_unimodal(bs, us):
        raise NotRowConvex(f"spans {spans} are not row-convex")
    for i in range(len(spans) - 1):
        (b0, u0), (b1, u1) = spans[i], spans[i + 1]
        if max(b0, b1) > min(u0, u1):
            raise BrokenAdjacency(f"columns {i} and {i + 1} share no row")
    # both characterizations must agree on edge-connected column-convex input
    if not is_row_convex_direct(_cells_from_spans(spans)):  # pragma: no cover - would indicate a logic bug
        raise AssertionError(f"row-convexity checks disagree on {spans}")
    shift = spans[0][0]
    return ConvexPolyomino(tuple(ColumnSpan(b - shift, u - shift) for b, u in spans))


def _cells_from_spans(spans):
    return {(x, y) for x, (b, u) in enumerate(spans) for y in range(b, u + 1)}


def cells_of(p: ConvexPolyomino) -> frozenset[tuple[int, int]]:
    return frozenset(_cells_from_spans(p.spans))


def from_cells(cells: Iterable[Sequence[int]]) -> ConvexPolyomino:
    """Build a polyomino from an arbitrary (translated) cell list."""
    cells = {(int(x), int(y)) for x, y in cells}
    if not cells:
        raise EmptyInput("empty cell list")
    x0 = min(x for x, _ in cells)
    x1 = max(x for x, _ in cells)
    spans = []
    for x in range(x0, x1 + 1):
        ys = sorted(y for cx, y in cells if cx == x)
        if not ys:
            raise BrokenAdjacency(f"column x={x} is empty")
        if ys[-1] - ys[0] + 1 != len(ys):
            raise InvalidPolyomino(f"column x={x} is not contiguous")
        spans.append((ys[0], ys[-1]))
    return from_columns(spans)


def boundary_edge_counts(p: ConvexPolyomino) -> tuple[int, int]:
    """Return (horizontal, vertical) boundary edge counts by direct scan."""
    cells = cells_of(p)
    horiz = vert = 0
    for x, y in cells:
        horiz += ((x, y + 1) not in cells) + ((x, y - 1) not in cells)
        vert += ((x + 1, y) not in cells) + ((x - 1, y) not in cells)
    return horiz, vert


def compute_stats(p: ConvexPolyomino) -> StatVector:
    """All statistics of ``p`` counted directly on its cell set."""
    cells = cells_of(p)
    xs = {x for x, _ in cells}
    ys = {y for _, y in cells}
    horiz, vert = boundary_edge_counts(p)
    perimeter = horiz + vert

    # Edges of the union: horizontal edge (i, j)-(i+1, j) and vertical
    # edge (i, j)-(i, j+1), each recorded once.
    hedges = set()
    vedges = set()
    for x, y in cells:
        hedges.add((x, y))
        hedges.add((x, y + 1))
        vedges.add((x, y))
        vedges.add((x + 1, y))

    vertices = {(x + dx, y + dy) for x, y in cells for dx in (0, 1) for dy in (0, 1)}
    interior = 0
    degree = {2: 0, 3: 0, 4: 0}
    for i, j in vertices:
        around = sum((i - dx, j - dy) in cells for dx in (0, 1) for dy in (0, 1))
        if around == 4:
            interior += 1
            continue
        deg = ((i, j) in hedges) + ((i - 1, j) in hedges) + ((i, j) in vedges) + ((i, j - 1) in vedges)
        degree[deg] += 1

    outer = set()
    for x, y in cells:
        for nb in ((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)):
            if nb not in cells:
                outer.add(nb)

    first = p.columns[0]
    return StatVector(
        v=len(xs),
        h=len(ys),
        a=len(cells),
        c=first.height - 1,
        perimeter=perimeter,
        semiperimeter=perimeter // 2,
        interior=interior,
        d2=degree[2],
        d3=degree[3],
        d4=degree[4],
        o=len(outer),
    )


def class_flags(p: ConvexPolyomino) -> ClassFlags:
    bs = [c.b for c in p.columns]
    us = [c.u for c in p.columns]
    is_u = all(us[i + 1] <= us[i] for i in range(len(us) - 1))
    is_b = all(bs[i + 1] >= bs[i] for i in range(len(bs) - 1))
    return ClassFlags(is_u, is_b, is_u and is_b)


def mirror(p: ConvexPolyomino) -> ConvexPolyomino:
    """Reflect upside down (row y goes to -y)."""
    return from_columns([(-c.u, -c.b) for c in p.columns])


# -- serialization -----------------------------------------------------------

def to_text(p: ConvexPolyomino) -> str:
    return "".join(f"{x} {c.b} {c.u}\n" for x, c in enumerate(p.columns))


def from_text(text: str) -> ConvexPolyomino:
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InvalidPolyomino(f"line {lineno}: expected 'x b u', got {line!r}")
        rows.append(tuple(int(t) for t in parts))
    if not rows:
        raise EmptyInput("no column records")
    rows.sort()
    x0 = rows[0][0]
    for i, (x, _, _) in enumerate(rows):
        if x != x0 + i:
            raise InvalidPolyomino(f"column records are not consecutive at x={x}")
    return from_columns([(b, u) for _, b, u in rows])


def to_json(p: ConvexPolyomino) -> str:
    return json.dumps({"cells": sorted([x, y] for x, y in cells_of(p))})


def from_json(text: str) -> ConvexPolyomino:
    data = json.loads(text)
    if not isinstance(data, dict) or "cells" not in data:
        raise InvalidPolyomino('expected an object with key "cells"')
    return from_cells(data["cells"])


def read_polyomino(text: str) -> ConvexPolyomino:
    """Parse either serialization; JSON is detected by a leading brace."""
    if text.lstrip().startswith("{"):
        return from_json(text)
    return from_text(text)


def figure1_path() -> Path:
    """Path of the bundled Figure 1 polyomino file (column-record format)."""
    return Path(str(resources.files("convexpoly").joinpath("data", "figure1.txt")))
