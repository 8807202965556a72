"""Column-transfer recurrences at coefficient level.

A convex polyomino is its first column glued to a smaller convex polyomino
(the rest).  The possible placements of the second column relative to the
first are sorted into labelled cases; each case fixes the class the rest must
belong to and the monomial the join contributes.  Iterating on the number of
columns gives exact coefficients for every polyomino with at most ``X``
columns and at most ``Y`` rows, with no fixed point to solve.

States are ``(class, k)`` with class in ``CP``, ``CPu``, ``CPbu`` and ``k``
the first-column height.  A rest in ``CPb`` is counted through ``CPu`` by the
up-down mirror, which preserves every statistic handled here.

Families and their variables:

==============  ====================  =========================================
family          vars                  marks
==============  ====================  =========================================
perimeter_area  x, y, t               t: cells
interior        x, y, q               q: interior vertices
degrees         x, y, q               q: boundary vertices of degree 2
degrees (all)   x, y, q, p, t         q, p, t: degree 2, 3, 4 vertices
outer           x, y, q               q: outer-site perimeter
==============  ====================  =========================================

``x`` marks columns and ``y`` rows throughout.  With ``with_z=True`` the first
column height ``k`` is also recorded as ``z**(k-1)``.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import InconsistentBounds
from .series import TruncatedSeries

__all__ = [
    "FAMILIES",
    "Placement",
    "placements",
    "case_label",
    "weight",
    "dp_series",
    "dp_vs_bruteforce",
    "MismatchReport",
]

FAMILIES = ("perimeter_area", "interior", "degrees", "outer")
CLASSES = ("CP", "CPu", "CPbu")


@dataclass(frozen=True)
class Placement:
    """Second column ``[b2, u2]`` against a first column ``[0, k-1]``."""

    k: int
    l: int
    b2: int

    @property
    def u2(self) -> int:
        return self.b2 + self.l - 1

    @property
    def db(self) -> int:
        """b2 - b1: positive when the second column starts higher."""
        return self.b2

    @property
    def du(self) -> int:
        """u2 - u1: negative when the second column stops lower."""
        return self.u2 - (self.k - 1)

    @property
    def overlap(self) -> int:
        return min(self.k - 1, self.u2) - max(0, self.b2) + 1

    @property
    def new_rows(self) -> int:
        return self.k - self.overlap


def placements(k: int, l: int) -> Iterator[Placement]:
    """All edge-connected placements of an ``l``-cell column next to a ``k``-cell one."""
    for b2 in range(-(l - 1), k):
        yield Placement(k, l, b2)


# -- rest class and case labels ------------------------------------------------

def rest_class(src: str, p: Placement) -> str | None:
    """Class the rest must lie in, or None when the placement is illegal for ``src``.

    ``"CPb"`` is returned for the mirror of a ``CPu`` rest.
    """
    db, du = p.db, p.du
    if src == "CPbu":
        return "CPbu" if db >= 0 and du <= 0 else None
    if src == "CPu":
        if du > 0:
            return None
        if db > 0:
            return "CPbu"
        return "CPu"
    # src == "CP"
    if db > 0 and du < 0:
        return "CPbu"
    if db == 0 and du < 0:
        return "CPu"
    if db > 0 and du == 0:
        return "CPb"
    if db < 0 and du < 0:
        return "CPu"
    if db > 0 and du > 0:
        return "CPb"
    return "CP"  # same span, or the second column reaches past the first


def case_label(src: str, p: Placement, scheme: str) -> str:
    """Case label of a placement under the perimeter (``"perimeter"``) or
    outer-site (``"outer"``) decomposition."""
    db, du, k, l = p.db, p.du, p.k, p.l
    if scheme == "perimeter":
        if src == "CPbu":
            return "bu:glue"
        if src == "CPu":
            if db > 0:
                return "u:(2)"
            if db == 0:
                return "u:(3)"
            return "u:(4)" if l <= k else "u:(5)"
        if db > 0 and du < 0:
            return "(2)"
        if (db == 0 and du < 0) or (db > 0 and du == 0):
            return "(3)"
        if db == 0 and du == 0:
            return "(4)"
        if (db < 0 and du < 0) or (db > 0 and du > 0):
            return "(5)"
        if (db < 0 and du == 0) or (db == 0 and du > 0):
            return "(6)"
        return "(7)"
    if scheme == "outer":
        prefix = {"CPbu": "bu:", "CPu": "u:", "CP": ""}[src]
        if db > 0 and du < 0:
            lab = "(2)"
        elif db == 0 and du < 0:
            lab = "(3)"
        elif db > 0 and du == 0:
            lab = "(4)"
        elif db == 0 and du == 0:
            lab = "(5)"
        elif db < 0 and du < 0:
            lab = "(6)"
        elif db > 0 and du > 0:
            lab = "(6')"
        elif db < 0 and du == 0:
            lab = "(7)"
        elif db == 0 and du > 0:
            lab = "(7')"
        else:
            lab = "(8)"
        return prefix + lab
    raise ValueError(f"unknown scheme {scheme!r}")


# -- weights ---------------------------------------------------------------------
#
# A weight is (multiplicity, exponent of y, exponents of the marks).  The first
# column itself is weighted by ``base``; joins by ``weight``.

def _outer_geometric(p: Placement) -> int:
    """Outer cells gained by gluing the first column, counted on the two columns."""
    col1 = set(range(0, p.k))
    col2 = set(range(p.b2, p.u2 + 1))
    left_column = {-1, p.k} | (col2 - col1)
    right_column = col1 - set(range(p.b2 - 1, p.u2 + 2))
    return p.k + len(left_column) - p.l + len(right_column)


# printed outer-site exponents per case label
_OUTER_PRINTED = {
    "(2)": lambda p: 2 * p.k - 2 * p.l,
    "(3)": lambda p: 2 * p.k - 2 * p.l + 1,
    "(4)": lambda p: 2 * p.k - 2 * p.l + 1,
    "(5)": lambda p: 2,
    "(6)": lambda p: 2 * p.new_rows,
    "(6')": lambda p: 2 * p.new_rows,
    "(7)": lambda p: 1,
    "(7')": lambda p: 1,
    "(8)": lambda p: 2,
}


def _unaligned(p: Placement) -> int:
    return (p.db != 0) + (p.du != 0)


def _degree_line(p: Placement) -> tuple[int, int, int]:
    """(delta d2, delta d3, delta d4) from the vertices on the shared grid line."""
    def end(gap):
        return abs(gap) - 1 if gap else 1

    d2 = _unaligned(p)
    d4 = _unaligned(p)
    d3 = (p.k - 1) + end(p.du) + end(p.db) - (p.l - 1)
    return d2, d3, d4


def mark_names(family: str, all_degrees: bool = False) -> tuple[str, ...]:
    if family == "perimeter_area":
        return ("t",)
    if family == "degrees" and all_degrees:
        return ("q", "p", "t")
    if family in FAMILIES:
        return ("q",)
    raise ValueError(f"unknown family {family!r}; expected one of {FAMILIES}")


def base(family: str, k: int, all_degrees: bool = False, outer_weights: str = "geometric") -> tuple[int, ...]:
    """Mark exponents of a single column of height ``k``."""
    if family == "perimeter_area":
        return (k,)
    if family == "interior":
        return (0,)
    if family == "degrees":
        return (4, 2 * k - 2, 0) if all_degrees else (4,)
    if family == "outer":
        return (2 * k + 2,)
    raise ValueError(family)


def weight(family: str, src: str, p: Placement, all_degrees: bool = False,
           outer_weights: str = "geometric") -> tuple[int, ...]:
    """Mark exponents contributed by gluing a first column in placement ``p``."""
    if family == "perimeter_area":
        return (p.k,)
    if family == "interior":
        return (p.overlap - 1,)
    if family == "degrees":
        line = _degree_line(p)
        return line if all_degrees else (line[0],)
    if family == "outer":
        if outer_weights == "geometric":
            return (_outer_geometric(p),)
        lab = case_label(src, p, "outer").split(":")[-1]
        return (_OUTER_PRINTED[lab](p),)
    raise ValueError(family)


@dataclass(frozen=True)
class TableRow:
    label: str
    src: str
    target: str
    k: int
    l: int
    multiplicity: int
    dy: int
    marks: tuple[int, ...]


def transition_table(family: str, src: str, max_k: int, all_degrees: bool = False,
                     outer_weights: str = "geometric") -> list[TableRow]:
    """Every join out of ``(src, k)`` for ``k <= max_k``, merged per monomial.

    Each row keeps the case label it came from, so the table can be read
    against the written recurrences.
    """
    scheme = "outer" if family == "outer" else "perimeter"
    merged: Counter = Counter()
    for k in range(1, max_k + 1):
        for l in range(1, max_k + 1):
            for p in placements(k, l):
                tgt = rest_class(src, p)
                if tgt is None:
                    continue
                w = weight(family, src, p, all_degrees, outer_weights)
                target = "CPu" if tgt == "CPb" else tgt
                merged[(case_label(src, p, scheme), target, k, l, p.new_rows, w)] += 1
    return [TableRow(lab, src, tgt, k, l, m, dy, w) for (lab, tgt, k, l, dy, w), m in sorted(merged.items())]


# -- the DP -------------------------------------------------------------------------

def dp_series(family: str, cls: str = "CP", x_box: int = 8, y_box: int | None = None,
              mark_box: int | tuple[int, ...] | None = None, with_z: bool = False,
              all_degrees: bool = False, outer_weights: str = "geometric",
              max_k: int | None = None) -> TruncatedSeries:
    """Truncated generating function of ``cls`` for one statistic family.

    Coefficients of ``x**v y**h`` are exact for ``v <= x_box`` and
    ``h <= y_box``: such polyominoes have at most ``x_box`` columns, each of
    height at most ``y_box``.  Marks are kept up to ``mark_box`` (default: the
    largest value that can occur in the box).
    """
    if cls not in CLASSES:
        raise ValueError(f"class must be one of {CLASSES}")
    y_box = x_box if y_box is None else y_box
    max_k = y_box if max_k is None else max_k
    if x_box < 1 or y_box < 1:
        raise InconsistentBounds("boxes must be at least 1")
    if max_k > y_box:
        raise InconsistentBounds(f"max_k={max_k} exceeds the y-box {y_box}")
    names = mark_names(family, all_degrees)
    if mark_box is None:
        mark_box = _default_mark_box(family, x_box, y_box, all_degrees)
    if isinstance(mark_box, int):
        mark_box = (mark_box,) * len(names)
    mark_box = tuple(mark_box)
    if len(mark_box) != len(names):
        raise InconsistentBounds(f"mark_box needs {len(names)} entries")

    shape = (y_box + 1,) + tuple(m + 1 for m in mark_box)
    tables = {c: transition_table(family, c, max_k, all_degrees, outer_weights) for c in CLASSES}

    def empty():
        a = np.empty(shape, dtype=object)
        a.fill(0)
        return a

    # A join may lower a mark (degree-three vertices of the rest can turn
    # into degree-two or -four ones).  Shifting down is only exact when the
    # mark box holds every value that occurs, which the default box does.
    lowering = any(e < 0 for rows in tables.values() for row in rows for e in row.marks)
    full = _default_mark_box(family, x_box, y_box, all_degrees)
    if lowering and any(m < f for m, f in zip(mark_box, full)):
        raise InconsistentBounds(f"this family lowers marks; mark_box must be at least {full}")

    def shifted(arr, dy, marks, mult):
        # multiply by y**dy * marks**exps, dropping what leaves the box
        if dy > y_box or any(e > m for e, m in zip(marks, mark_box)):
            return None
        src = (slice(0, shape[0] - dy),) + tuple(
            slice(0, s - e) if e >= 0 else slice(-e, None) for s, e in zip(shape[1:], marks))
        dst = (slice(dy, None),) + tuple(
            slice(e, None) if e >= 0 else slice(0, s + e) for s, e in zip(shape[1:], marks))
        out = empty()
        out[dst] = arr[src] * mult
        return out

    # layer m: polyominoes with exactly m columns, by class and first height
    layer = {}
    for c in CLASSES:
        for k in range(1, max_k + 1):
            a = empty()
            ex = base(family, k, all_degrees, outer_weights)
            if all(e <= mb for e, mb in zip(ex, mark_box)):
                a[(k,) + ex] = 1
            layer[(c, k)] = a
    layers = [layer]
    for _ in range(2, x_box + 1):
        prev = layers[-1]
        nxt = {key: empty() for key in prev}
        for c in CLASSES:
            for row in tables[c]:
                piece = shifted(prev[(row.target, row.l)], row.dy, row.marks, row.multiplicity)
                if piece is not None:
                    nxt[(c, row.k)] += piece
        layers.append(nxt)

    vars_ = ("x", "y") + (("z",) if with_z else ()) + names
    box = (x_box, y_box) + ((max_k - 1,) if with_z else ()) + mark_box
    coeffs = {}
    for m, lay in enumerate(layers, start=1):
        for k in range(1, max_k + 1):
            arr = lay[(cls, k)]
            for idx in zip(*np.nonzero(arr != 0)):
                h, rest = int(idx[0]), tuple(int(i) for i in idx[1:])
                key = (m, h) + ((k - 1,) if with_z else ()) + rest
                coeffs[key] = coeffs.get(key, 0) + arr[idx]
    return TruncatedSeries(vars_, box, coeffs)


def _default_mark_box(family, x_box, y_box, all_degrees):
    sp = x_box + y_box
    if family == "perimeter_area":
        return (x_box * y_box,)
    if family == "interior":
        return (max(0, (x_box - 1) * (y_box - 1)),)
    if family == "degrees":
        # d2 <= sp + 2, d3 <= 2 sp, d4 <= sp - 2
        return (sp + 2, 2 * sp, max(0, sp - 2)) if all_degrees else (sp + 2,)
    if family == "outer":
        # printed weights can exceed the true count by 2 per join
        return (2 * sp + 2 * x_box,)
    raise ValueError(family)


# -- cross-check against brute force --------------------------------------------------

_FAMILY_STAT = {"perimeter_area": "a", "interior": "int", "degrees": "d2", "outer": "o"}


@dataclass
class MismatchReport:
    family: str
    cls: str
    max_semiperimeter: int
    compared: int = 0
    mismatches: list[tuple[tuple[int, ...], int, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def first(self) -> str:
        if self.ok:
            return "no mismatch"
        e, dp, bf = self.mismatches[0]
        return f"{self.family}/{self.cls} at exponents {e}: dp={dp} brute={bf}"


def dp_vs_bruteforce(family: str, max_semiperimeter: int, cls: str = "CP",
                     outer_weights: str = "geometric", joint: Counter | None = None) -> MismatchReport:
    """Compare every ``x**v y**h mark**s`` coefficient with ``v + h <= max_semiperimeter``.

    ``joint`` may supply a precomputed ``joint_counts(.., ("v", "h", stat))``.
    """
    from .enumerator import joint_counts

    n = max_semiperimeter
    stat = _FAMILY_STAT[family]
    if joint is None:
        joint = joint_counts(n, cls, ("v", "h", stat))
    dp = dp_series(family, cls, x_box=n - 1, y_box=n - 1, outer_weights=outer_weights)
    report = MismatchReport(family, cls, n)
    mb = dp.box[2]
    seen = set()
    for (v, h, s), cnt in sorted(joint.items()):
        if v + h > n:
            continue
        seen.add((v, h, s))
        got = int(dp.coeff((v, h, s))) if s <= mb else None
        report.compared += 1
        if got != cnt:
            report.mismatches.append(((v, h, s), got, cnt))
    for e, c in sorted(dp.coeffs.items()):
        v, h, s = e
        if v + h <= n and e not in seen:
            report.compared += 1
            report.mismatches.append((e, int(c), 0))
    report.mismatches.sort()
    return report
