"""Exhaustive generation of convex polyominoes and exact census tables.

Generation is a depth-first search over column spans.  Each search node is
itself a convex polyomino (every prefix of a convex column sequence is
convex), so the search tree *is* the stream.  Row-convexity is maintained
incrementally through two phase bits: the bottoms may fall then rise, the
tops may rise then fall.

Statistics are accumulated along the search path from per-column local
counts (vertex stencils on each vertical grid line, complement cells per
column); ``tests/test_enumerator.py`` checks them against
:func:`convexpoly.geometry.compute_stats` on every polyomino up to a fixed
semi-perimeter.
"""
from __future__ import annotations

import csv
import io
import json
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

from .errors import BudgetTooSmall, UncertifiableRange, UnknownStatistic
from .geometry import ColumnSpan, ConvexPolyomino, StatVector

__all__ = [
    "CLASSES",
    "STATISTICS",
    "CensusRow",
    "CensusTable",
    "Histogram",
    "enumerate_polyominoes",
    "enumerate_with_stats",
    "census",
    "census_by_outer",
    "histogram",
    "joint_counts",
    "partitions",
]

CLASSES = ("CP", "CPu", "CPb", "CPbu")
STATISTICS = ("a", "c", "int", "d2", "d3", "d4", "o", "perimeter")
HISTOGRAM_KEYS = ("d2+d3", "d3+d4", "o", "int", "d2")

# phase flags
_FALLING, _RISING = 0, 1


def _norm_class(cls: str) -> str:
    for name in CLASSES:
        if cls.lower() == name.lower():
            return name
    raise ValueError(f"unknown class {cls!r}; expected one of {CLASSES}")


@lru_cache(maxsize=None)
def _line_counts(b1: int, u1: int, b2: int, u2: int) -> tuple[int, int, int, int]:
    """Vertex counts on the grid line between two adjacent columns.

    Returns the number of vertices on the line touched by exactly 1, 2, 3
    and 4 cells.  Callers pass the right column relative to the left one.
    """

    def around(j):
        s = 0
        for b, u in ((b1, u1), (b2, u2)):
            s += (b <= j - 1 <= u) + (b <= j <= u)
        return s

    out = [0, 0, 0, 0, 0]
    for j in range(min(b1, b2), max(u1, u2) + 2):
        out[around(j)] += 1
    return out[1], out[2], out[3], out[4]


def _column_outer(prev, cur, nxt) -> int:
    """Complement cells in the column of ``cur`` that touch the polyomino."""
    lo = cur[0] - 1
    hi = cur[1] + 1
    if prev is not None:
        lo = min(lo, prev[0])
        hi = max(hi, prev[1])
    if nxt is not None:
        lo = min(lo, nxt[0])
        hi = max(hi, nxt[1])
    return (hi - lo + 1) - (cur[1] - cur[0] + 1)


def _children(span, bphase, uphase, lo, hi, ncols, budget):
    """Yield (b', u', bphase', uphase') for admissible next columns.

    ``lo``/``hi`` are the lowest/highest occupied rows so far and ``ncols``
    the current number of columns; the child must keep ``h + v <= budget``.
    """
    b, u = span
    room = budget - ncols - 1  # rows allowed after adding one column
    blo = b if bphase == _RISING else hi - room + 1
    for nb in range(blo, u + 1):
        nbphase = _RISING if nb > b else bphase
        nlo = lo if lo < nb else nb
        if hi - nlo + 1 > room:
            continue
        if uphase == _FALLING:
            uhi = u
        else:
            uhi = nlo + room - 1
        for nu in range(max(nb, b), uhi + 1):
            nuphase = _FALLING if nu < u else uphase
            yield nb, nu, nbphase, nuphase


def _initial_phases(cls: str):
    bphase = _RISING if cls in ("CPb", "CPbu") else _FALLING
    uphase = _FALLING if cls in ("CPu", "CPbu") else _RISING
    return bphase, uphase


def partitions(max_semiperimeter: int, cls: str = "CP") -> list[tuple]:
    """Independent work units: first column height and first transition."""
    cls = _norm_class(cls)
    bphase, uphase = _initial_phases(cls)
    units = []
    for k in range(1, max_semiperimeter):
        units.append((k, None))
        first = (0, k - 1)
        for child in _children(first, bphase, uphase, 0, k - 1, 1, max_semiperimeter):
            units.append((k, child[:2]))
    return units


def _walk(max_sp: int, cls: str, unit=None) -> Iterator[tuple[tuple, tuple]]:
    """Core DFS.  Yields ``(spans, stats)`` with ``stats`` the tuple
    ``(v, h, a, c, int, d2, d3, d4, o)``.

    ``unit`` restricts the walk to one partition from :func:`partitions`:
    ``(k, None)`` is the single column of height ``k``; ``(k, (b, u))`` is the
    subtree whose first two columns are ``(0, k-1), (b, u)``.
    """
    bphase0, uphase0 = _initial_phases(cls)
    stack: list[tuple[int, int]] = []
    # per-depth accumulators: a, int, n1, n2, n3, o (o excludes the last column)
    acc: list[tuple[int, int, int, int, int, int]] = []

    def emit(lo, hi):
        a, it, n1, n2, n3, o = acc[-1]
        last = stack[-1]
        prev = stack[-2] if len(stack) > 1 else None
        k_last = last[1] - last[0] + 1
        o_total = o + _column_outer(prev, last, None) + k_last
        first = stack[0]
        stats = (
            len(stack),
            hi - lo + 1,
            a,
            first[1] - first[0],
            it,
            n1 + 2,
            n2 + k_last - 1,
            n3,
            o_total,
        )
        return tuple(stack), stats

    def push(span):
        b, u = span
        k = u - b + 1
        if not stack:
            # left border line: 2 single-cell corners, k-1 two-cell vertices
            acc.append((k, 0, 2, k - 1, 0, k))
        else:
            pb, pu = stack[-1]
            a, it, n1, n2, n3, o = acc[-1]
            l1, l2, l3, l4 = _line_counts(0, pu - pb, b - pb, u - pb)
            prev2 = stack[-2] if len(stack) > 1 else None
            o += _column_outer(prev2, stack[-1], span)
            acc.append((a + k, it + l4, n1 + l1, n2 + l2, n3 + l3, o))
        stack.append(span)

    def pop():
        stack.pop()
        acc.pop()

    def rec(bphase, uphase, lo, hi):
        yield emit(lo, hi)
        span = stack[-1]
        for nb, nu, nbp, nup in _children(span, bphase, uphase, lo, hi, len(stack), max_sp):
            push((nb, nu))
            yield from rec(nbp, nup, min(lo, nb), max(hi, nu))
            pop()

    if unit is None:
        heights = range(1, max_sp)
    else:
        heights = [unit[0]]
    for k in heights:
        if k + 1 > max_sp:
            break
        first = (0, k - 1)
        push(first)
        if unit is None:
            yield from rec(bphase0, uphase0, 0, k - 1)
        elif unit[1] is None:
            yield emit(0, k - 1)
        else:
            for nb, nu, nbp, nup in _children(first, bphase0, uphase0, 0, k - 1, 1, max_sp):
                if (nb, nu) == tuple(unit[1]):
                    push((nb, nu))
                    yield from rec(nbp, nup, min(0, nb), max(k - 1, nu))
                    pop()
        pop()


def _check_budget(max_semiperimeter: int):
    if max_semiperimeter < 2:
        raise BudgetTooSmall(f"max_semiperimeter must be >= 2, got {max_semiperimeter}")


def _poly(spans) -> ConvexPolyomino:
    # spans from the search are already normalized and convex
    return ConvexPolyomino(tuple(ColumnSpan(b, u) for b, u in spans))


def _statvector(s) -> StatVector:
    v, h, a, c, it, d2, d3, d4, o = s
    return StatVector(v=v, h=h, a=a, c=c, perimeter=2 * (h + v), semiperimeter=h + v,
                      interior=it, d2=d2, d3=d3, d4=d4, o=o)


def enumerate_polyominoes(max_semiperimeter: int, cls: str = "CP") -> Iterator[ConvexPolyomino]:
    """Stream every polyomino of ``cls`` with ``h + v <= max_semiperimeter``
    exactly once, in lexicographic order of column-span sequences."""
    _check_budget(max_semiperimeter)
    cls = _norm_class(cls)
    for spans, _ in _walk(max_semiperimeter, cls):
        yield _poly(spans)


def enumerate_with_stats(max_semiperimeter: int, cls: str = "CP") -> Iterator[tuple[ConvexPolyomino, StatVector]]:
    _check_budget(max_semiperimeter)
    cls = _norm_class(cls)
    for spans, s in _walk(max_semiperimeter, cls):
        yield _poly(spans), _statvector(s)


# -- census -----------------------------------------------------------------

_STAT_INDEX = {"v": 0, "h": 1, "a": 2, "c": 3, "int": 4, "d2": 5, "d3": 6, "d4": 7, "o": 8}


def _stat_value(s, name):
    if name == "perimeter":
        return 2 * (s[0] + s[1])
    if name == "semiperimeter":
        return s[0] + s[1]
    if "+" in name:
        return sum(_stat_value(s, part) for part in name.split("+"))
    return s[_STAT_INDEX[name]]


@dataclass
class CensusRow:
    count: int = 0
    totals: dict[str, int] = field(default_factory=dict)


@dataclass
class CensusTable:
    grading: str
    rows: dict[int, CensusRow] = field(default_factory=dict)
    statistics: tuple[str, ...] = ()

    def counts(self) -> dict[int, int]:
        return {g: r.count for g, r in sorted(self.rows.items())}

    def totals(self, stat: str) -> dict[int, int]:
        return {g: r.totals[stat] for g, r in sorted(self.rows.items())}

    def merge(self, other: "CensusTable") -> "CensusTable":
        if other.grading != self.grading or other.statistics != self.statistics:
            raise ValueError("cannot merge tables with different layouts")
        for g, row in other.rows.items():
            mine = self.rows.setdefault(g, CensusRow(0, {s: 0 for s in self.statistics}))
            mine.count += row.count
            for s, t in row.totals.items():
                mine.totals[s] += t
        return self

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["grade", "count", *self.statistics])
        for g in sorted(self.rows):
            row = self.rows[g]
            w.writerow([g, row.count, *(row.totals[s] for s in self.statistics)])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "grading": self.grading,
            "rows": {
                str(g): {"count": str(r.count), "totals": {s: str(r.totals[s]) for s in self.statistics}}
                for g, r in sorted(self.rows.items())
            },
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CensusTable":
        doc = json.loads(text)
        rows = {}
        stats: tuple[str, ...] = ()
        for g, r in doc["rows"].items():
            totals = {s: int(t) for s, t in r["totals"].items()}
            stats = tuple(totals)
            rows[int(g)] = CensusRow(int(r["count"]), totals)
        return cls(doc["grading"], rows, stats)


def _census_unit(args):
    max_sp, cls, unit, grading, statistics = args
    table = CensusTable(grading, {}, statistics)
    rows = table.rows
    for _, s in _walk(max_sp, cls, unit):
        g = _stat_value(s, grading)
        row = rows.get(g)
        if row is None:
            row = rows[g] = CensusRow(0, {st: 0 for st in statistics})
        row.count += 1
        for st in statistics:
            row.totals[st] += _stat_value(s, st)
    return table


def _run_census(max_sp, cls, grading, statistics, threads=1) -> CensusTable:
    if threads <= 1:
        return _census_unit((max_sp, cls, None, grading, statistics))
    units = [(max_sp, cls, u, grading, statistics) for u in partitions(max_sp, cls)]
    result = CensusTable(grading, {}, statistics)
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for part in pool.map(_census_unit, units, chunksize=4):
            result.merge(part)
    return result


def census(max_semiperimeter: int, cls: str = "CP", statistics=(), threads: int = 1) -> CensusTable:
    """Exact count and statistic totals per semi-perimeter."""
    _check_budget(max_semiperimeter)
    cls = _norm_class(cls)
    statistics = tuple(statistics)
    for s in statistics:
        if s not in STATISTICS:
            raise UnknownStatistic(s)
    table = _run_census(max_semiperimeter, cls, "semiperimeter", statistics, threads)
    table.rows = dict(sorted(table.rows.items()))
    return table


def census_by_outer(max_outer: int, threads: int = 1) -> CensusTable:
    """Counts of convex polyominoes by outer-site perimeter ``4 <= o <= max_outer``.

    Complete because ``o >= h + v + 2``: every polyomino with ``o <= max_outer``
    has semi-perimeter at most ``max_outer - 2``.
    """
    if max_outer < 4:
        raise BudgetTooSmall(f"max_outer must be >= 4, got {max_outer}")
    max_sp = max(2, max_outer - 2)
    full = _run_census(max_sp, "CP", "o", ("perimeter",), threads)
    table = CensusTable("outer", {}, ("perimeter",))
    for o in range(4, max_outer + 1):
        row = full.rows.get(o)
        table.rows[o] = CensusRow(row.count, dict(row.totals)) if row else CensusRow(0, {"perimeter": 0})
    return table


def certified_max_grade(key: str, max_semiperimeter: int) -> int | None:
    """Largest grade whose histogram count is provably complete, or None."""
    if key == "d2+d3":
        return max_semiperimeter + 2  # h + v <= n - 2
    if key == "d3+d4":
        return max_semiperimeter - 2  # h + v <= n + 2
    if key == "o":
        return max_semiperimeter + 2  # h + v <= o - 2
    if key in ("int", "d2"):
        return None  # infinitely many polyominoes share each value
    raise UnknownStatistic(key)


@dataclass
class Histogram:
    key: str
    counts: dict[int, int]
    certified: tuple[int, int] | None

    def __getitem__(self, grade: int) -> int:
        if self.certified is None or not (self.certified[0] <= grade <= self.certified[1]):
            raise UncertifiableRange(
                f"grade {grade} of {self.key} is outside the certified range {self.certified}; "
                "raise max_semiperimeter"
            )
        return self.counts.get(grade, 0)


def histogram(max_semiperimeter: int, key: str, cls: str = "CP") -> Histogram:
    """Counts per value of ``key`` over the grades the budget certifies."""
    _check_budget(max_semiperimeter)
    if key not in HISTOGRAM_KEYS:
        raise UnknownStatistic(key)
    top = certified_max_grade(key, max_semiperimeter)
    if top is None:
        return Histogram(key, {}, None)
    raw: Counter = Counter()
    for _, s in _walk(max_semiperimeter, _norm_class(cls)):
        g = _stat_value(s, key)
        if g <= top:
            raw[g] += 1
    return Histogram(key, {g: raw[g] for g in range(0, top + 1) if raw[g]}, (0, top))


def joint_counts(max_semiperimeter: int, cls: str, keys) -> Counter:
    """Multiset of statistic tuples, e.g. ``keys=("v", "h", "c")`` gives the
    coefficients of a truncated multivariate generating function."""
    _check_budget(max_semiperimeter)
    cls = _norm_class(cls)
    keys = tuple(keys)
    out: Counter = Counter()
    for _, s in _walk(max_semiperimeter, cls):
        out[tuple(_stat_value(s, k) for k in keys)] += 1
    return out
