"""Truncated multivariate power series with exact rational coefficients.

A :class:`TruncatedSeries` carries a tuple of variable names, a per-variable
truncation box (inclusive maximum exponents) and a dense array of integer
numerators over one common denominator.  Every coefficient inside the box is
exact; operations return the box inside which *their* result is exact, so
boxes shrink through divisions by monomials, derivatives and remaps and never
silently claim more than they know.

Multiplication packs both operands into single big integers (Kronecker
substitution) and lets CPython's big-integer product do the convolution.

Half-integer powers of ``x`` are handled by a proxy variable ``s`` with
``x = s**2``; see :func:`substitute` and :func:`even_part`.
"""
from __future__ import annotations

import ast
import math
from fractions import Fraction
from functools import reduce
from numbers import Rational
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    BoxOverflow,
    IllegalComposition,
    NotAUnit,
    NotDivisible,
    NotUnitOne,
    OddPartNonzero,
    OutsideBox,
    SeriesError,
    VarMismatch,
)

__all__ = [
    "ALLOWED_VARS",
    "TruncatedSeries",
    "DegreeBound",
    "arith",
    "invert_unit",
    "exact_div",
    "sqrt_unit",
    "derive",
    "substitute",
    "even_part",
    "eval_expr",
    "parse_expr",
    "coeff",
    "dump",
    "load",
    "rescale",
    "embed",
    "odd_even_split",
]

ALLOWED_VARS = ("x", "y", "z", "t", "q", "p", "s")


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact rational: {c!r}")


def _zeros(shape) -> np.ndarray:
    a = np.empty(shape, dtype=object)
    a.fill(0)
    return a


def _gcd_all(arr: np.ndarray, seed: int = 0) -> int:
    vals = arr.ravel().tolist()
    return math.gcd(seed, *vals) if vals else seed


class TruncatedSeries:
    """A power series known exactly for all exponents inside ``box``."""

    __slots__ = ("vars", "box", "_num", "_den")

    def __init__(self, vars: Sequence[str], box: Sequence[int], coeffs: Mapping | None = None):
        vars = tuple(vars)
        box = tuple(int(b) for b in box)
        if len(set(vars)) != len(vars):
            raise VarMismatch(f"repeated variable in {vars}")
        for v in vars:
            if v not in ALLOWED_VARS:
                raise VarMismatch(f"unknown variable {v!r}")
        if len(box) != len(vars):
            raise VarMismatch("box and vars differ in length")
        if any(b < 0 for b in box):
            raise BoxOverflow(f"negative box bound in {box}")
        num = _zeros(tuple(b + 1 for b in box))
        den = 1
        if coeffs:
            fr = {}
            for e, c in coeffs.items():
                e = tuple(e)
                if len(e) != len(vars):
                    raise VarMismatch(f"exponent {e} does not match vars {vars}")
                if any(ei < 0 for ei in e):
                    raise OutsideBox(f"negative exponent {e}")
                if all(ei <= bi for ei, bi in zip(e, box)):
                    fr[e] = fr.get(e, 0) + _as_fraction(c)
            den = reduce(math.lcm, (f.denominator for f in fr.values()), 1)
            for e, f in fr.items():
                num[e] = f.numerator * (den // f.denominator)
        self.vars = vars
        self.box = box
        self._num = num
        self._den = den
        self._normalize()

    # -- construction helpers ------------------------------------------------
    @classmethod
    def _raw(cls, vars, box, num, den) -> "TruncatedSeries":
        obj = cls.__new__(cls)
        obj.vars = tuple(vars)
        obj.box = tuple(box)
        obj._num = num
        obj._den = den
        obj._normalize()
        return obj

    @classmethod
    def const(cls, vars, box, value) -> "TruncatedSeries":
        f = _as_fraction(value)
        num = _zeros(tuple(b + 1 for b in box))
        num[(0,) * len(vars)] = f.numerator
        return cls._raw(vars, box, num, f.denominator)

    @classmethod
    def zero(cls, vars, box) -> "TruncatedSeries":
        return cls.const(vars, box, 0)

    @classmethod
    def one(cls, vars, box) -> "TruncatedSeries":
        return cls.const(vars, box, 1)

    @classmethod
    def monomial(cls, vars, box, exps: Mapping[str, int] | Sequence[int], c=1) -> "TruncatedSeries":
        if isinstance(exps, Mapping):
            for k in exps:
                if k not in vars:
                    raise VarMismatch(f"{k!r} not in {tuple(vars)}")
            e = tuple(exps.get(v, 0) for v in vars)
        else:
            e = tuple(exps)
        return cls(vars, box, {e: c})

    @classmethod
    def var(cls, vars, box, name: str) -> "TruncatedSeries":
        if name not in vars:
            raise VarMismatch(f"{name!r} not in {tuple(vars)}")
        return cls.monomial(vars, box, {name: 1})

    @classmethod
    def from_array(cls, vars, num: np.ndarray, den: int = 1) -> "TruncatedSeries":
        box = tuple(n - 1 for n in num.shape)
        return cls._raw(vars, box, num.astype(object), den)

    def _normalize(self):
        if self._den < 0:
            self._num = -self._num
            self._den = -self._den
        if self._den != 1:
            g = _gcd_all(self._num, self._den)
            if g > 1:
                self._num = self._num // g
                self._den //= g

    # -- inspection ------------------------------------------------------------
    @property
    def coeffs(self) -> dict[tuple[int, ...], Fraction]:
        out = {}
        den = self._den
        for idx in zip(*np.nonzero(self._num != 0)):
            e = tuple(int(i) for i in idx)
            out[e] = Fraction(self._num[e], den)
        return out

    def coeff(self, exps) -> Fraction:
        if isinstance(exps, Mapping):
            exps = tuple(exps.get(v, 0) for v in self.vars)
        exps = tuple(exps)
        if len(exps) != len(self.vars):
            raise VarMismatch(f"exponent {exps} does not match vars {self.vars}")
        if any(e < 0 or e > b for e, b in zip(exps, self.box)):
            raise OutsideBox(f"exponent {exps} outside box {self.box}")
        return Fraction(self._num[exps], self._den)

    def __getitem__(self, exps) -> Fraction:
        if isinstance(exps, int):
            exps = (exps,)
        return self.coeff(exps)

    @property
    def constant_term(self) -> Fraction:
        return Fraction(self._num[(0,) * len(self.vars)], self._den)

    def is_zero(self) -> bool:
        return not self._num.any()

    def integer_coefficients(self) -> bool:
        return self._den == 1

    def support(self) -> list[tuple[int, ...]]:
        return sorted(tuple(int(i) for i in idx) for idx in zip(*np.nonzero(self._num != 0)))

    def univariate(self) -> list[Fraction]:
        """Coefficient list of a one-variable series."""
        if len(self.vars) != 1:
            raise VarMismatch("univariate() needs exactly one variable")
        return [Fraction(int(c), self._den) for c in self._num.tolist()]

    def __repr__(self):
        terms = []
        for e, c in sorted(self.coeffs.items())[:8]:
            mono = "*".join(f"{v}^{k}" if k > 1 else v for v, k in zip(self.vars, e) if k)
            terms.append(f"{c}" + (f"*{mono}" if mono else ""))
        more = " + ..." if len(self.coeffs) > 8 else ""
        return f"TruncatedSeries({' + '.join(terms) or '0'}{more}; vars={self.vars}, box={self.box})"

    # -- structural helpers ---------------------------------------------------
    def _check_vars(self, other: "TruncatedSeries"):
        if self.vars != other.vars:
            raise VarMismatch(f"vars {self.vars} != {other.vars}")

    def truncate(self, box: Sequence[int] | Mapping[str, int]) -> "TruncatedSeries":
        if isinstance(box, Mapping):
            box = tuple(box.get(v, b) for v, b in zip(self.vars, self.box))
        box = tuple(box)
        if any(nb > b for nb, b in zip(box, self.box)):
            raise BoxOverflow(f"cannot widen box {self.box} to {box}")
        sl = tuple(slice(0, b + 1) for b in box)
        return TruncatedSeries._raw(self.vars, box, self._num[sl].copy(), self._den)

    def restrict(self, other: "TruncatedSeries") -> tuple["TruncatedSeries", "TruncatedSeries"]:
        """Both operands cut down to their common box."""
        self._check_vars(other)
        box = tuple(min(a, b) for a, b in zip(self.box, other.box))
        return self.truncate(box), other.truncate(box)

    def agrees_with(self, other: "TruncatedSeries") -> bool:
        a, b = self.restrict(other)
        return a == b

    def __eq__(self, other):
        if isinstance(other, TruncatedSeries):
            return (
                self.vars == other.vars
                and self.box == other.box
                and self._den == other._den
                and bool(np.all(self._num == other._num))
            )
        if isinstance(other, (int, Fraction)):
            return self == TruncatedSeries.const(self.vars, self.box, other)
        return NotImplemented

    __hash__ = None

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check_vars(other)
            return other
        return TruncatedSeries.const(self.vars, self.box, _as_fraction(other))

    # -- ring operations -------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        a, b = self.restrict(other)
        den = math.lcm(a._den, b._den)
        num = a._num * (den // a._den) + b._num * (den // b._den)
        return TruncatedSeries._raw(a.vars, a.box, num, den)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries._raw(self.vars, self.box, -self._num, self._den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def scale(self, c) -> "TruncatedSeries":
        f = _as_fraction(c)
        return TruncatedSeries._raw(self.vars, self.box, self._num * f.numerator, self._den * f.denominator)

    def __mul__(self, other):
        if not isinstance(other, TruncatedSeries):
            return self.scale(other)
        self._check_vars(other)
        box = tuple(min(a, b) for a, b in zip(self.box, other.box))
        a = self.truncate(box)
        b = other.truncate(box)
        num = _mul_arrays(a._num, b._num, box)
        return TruncatedSeries._raw(self.vars, box, num, a._den * b._den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return exact_div(self, other)
        f = _as_fraction(other)
        if f == 0:
            raise ZeroDivisionError("division of a series by zero")
        return self.scale(1 / f)

    def __rtruediv__(self, other):
        return exact_div(self._coerce(other), self)

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return invert_unit(self) ** (-n)
        result = TruncatedSeries.one(self.vars, self.box)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    # -- misc ------------------------------------------------------------------
    def truncate_total_degree(self, max_deg: int) -> "TruncatedSeries":
        """Zero every coefficient of total degree above ``max_deg`` (box unchanged)."""
        deg = _total_degree(self._num.shape)
        num = self._num.copy()
        num[deg > max_deg] = 0
        return TruncatedSeries._raw(self.vars, self.box, num, self._den)

    def shift(self, exps: Sequence[int]) -> "TruncatedSeries":
        """Divide by the monomial with exponent ``exps`` (caller checks divisibility)."""
        exps = tuple(exps)
        newbox = tuple(b - e for b, e in zip(self.box, exps))
        if any(b < 0 for b in newbox):
            raise BoxOverflow(f"box {self.box} too small to divide by monomial {exps}")
        sl = tuple(slice(e, None) for e in exps)
        return TruncatedSeries._raw(self.vars, newbox, self._num[sl].copy(), self._den)


_DEG_CACHE: dict = {}


def _total_degree(shape) -> np.ndarray:
    d = _DEG_CACHE.get(shape)
    if d is None:
        d = np.indices(shape).sum(axis=0) if shape else np.zeros((), dtype=int)
        _DEG_CACHE[shape] = d
    return d


def _mul_arrays(A: np.ndarray, B: np.ndarray, box) -> np.ndarray:
    """Truncated product of two dense integer arrays via Kronecker packing.

    Each coefficient gets a slot of ``nwords`` 64-bit words; packing and
    unpacking are vectorized over those words, so only one big-integer
    multiplication runs in Python.
    """
    out_shape = tuple(b + 1 for b in box)
    nzA = int(np.count_nonzero(A))
    nzB = int(np.count_nonzero(B))
    if nzA == 0 or nzB == 0:
        return _zeros(out_shape)
    # constant operand: plain scaling
    if nzA == 1 and A.flat[0] != 0:
        return B * A.flat[0]
    if nzB == 1 and B.flat[0] != 0:
        return A * B.flat[0]
    full = tuple(a + b - 1 for a, b in zip(A.shape, B.shape))
    n = int(np.prod(full)) if full else 1
    maxA = int(np.max(np.abs(A)))
    maxB = int(np.max(np.abs(B)))
    bound = maxA * maxB * min(nzA, nzB)
    nwords = (bound.bit_length() + 2 + 63) // 64
    prod = _bigmul(_pack(A, full, nwords), _pack(B, full, nwords))
    bits = 64 * nwords
    half = 1 << (bits - 1)
    raw = (prod + _offset(n, nwords)).to_bytes(n * nwords * 8, "little")
    words = np.frombuffer(raw, dtype="<u8").reshape(full + (nwords,))
    keep = tuple(slice(0, min(s, f)) for s, f in zip(out_shape, full))
    words = words[keep]
    C = words[..., 0].astype(object)
    for k in range(1, nwords):
        C = C + (words[..., k].astype(object) << (64 * k))
    return np.asarray(C - half, dtype=object)


_MASK64 = (1 << 64) - 1

try:  # GMP multiplies huge integers far faster than CPython's Karatsuba
    import gmpy2

    def _bigmul(a: int, b: int) -> int:
        return int(gmpy2.mpz(a) * gmpy2.mpz(b))
except ImportError:  # pragma: no cover
    def _bigmul(a: int, b: int) -> int:
        return a * b
_OFFSET_CACHE: dict = {}


def _offset(n: int, nwords: int) -> int:
    """The integer with ``2**(64*nwords - 1)`` in each of ``n`` slots."""
    key = (n, nwords)
    val = _OFFSET_CACHE.get(key)
    if val is None:
        w = np.zeros((n, nwords), dtype="<u8")
        w[:, -1] = 1 << 63
        val = int.from_bytes(w.tobytes(), "little")
        if len(_OFFSET_CACHE) > 256:
            _OFFSET_CACHE.clear()
        _OFFSET_CACHE[key] = val
    return val


def _pack_part(A: np.ndarray, full, nwords: int) -> int:
    """Pack a nonnegative array into one integer, slot by slot."""
    buf = np.zeros(full + (nwords,), dtype="<u8")
    region = tuple(slice(0, s) for s in A.shape)
    rest = A
    for k in range(nwords):
        buf[region + (k,)] = (rest & _MASK64).astype(np.uint64)
        rest = rest >> 64
        if k + 1 < nwords and not rest.any():
            break
    return int.from_bytes(buf.tobytes(), "little")


def _pack(A: np.ndarray, full, nwords: int) -> int:
    neg = A < 0
    if not neg.any():
        return _pack_part(A, full, nwords)
    pos = np.where(neg, 0, A)
    return _pack_part(pos, full, nwords) - _pack_part(np.where(neg, -A, 0), full, nwords)


# -- public operations -------------------------------------------------------

def arith(op: str, a: TruncatedSeries, b=None) -> TruncatedSeries:
    """Dispatch ``add``, ``sub``, ``mul``, ``neg`` or ``scale``."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "scale":
        return a.scale(b)
    raise ValueError(f"unknown op {op!r}")


def coeff(a: TruncatedSeries, exps) -> Fraction:
    return a.coeff(exps)


def invert_unit(a: TruncatedSeries, max_degree: int | None = None) -> TruncatedSeries:
    """Multiplicative inverse of a series with nonzero constant term.

    Newton iteration ``r <- r (2 - a r)``, doubling the number of correct
    total degrees each round.  With ``max_degree`` the result is only
    computed (and exact) up to that total degree.
    """
    c0 = a.constant_term
    if c0 == 0:
        raise NotAUnit("constant term is zero")
    top = sum(a.box) if max_degree is None else min(max_degree, sum(a.box))
    r = TruncatedSeries.const(a.vars, a.box, 1 / c0)
    m = 1
    while m <= top:
        m2 = min(2 * m, top + 1)
        ar = (a.truncate_total_degree(m2 - 1) * r).truncate_total_degree(m2 - 1)
        r = (r * (2 - ar)).truncate_total_degree(m2 - 1)
        m = m2
    return r


def sqrt_unit(a: TruncatedSeries) -> TruncatedSeries:
    """Principal square root of a series with constant term 1.

    Newton iteration ``r <- (r + a/r) / 2`` from ``r = 1``; each round doubles
    the total degree up to which ``r`` is exact.
    """
    if a.constant_term != 1:
        raise NotUnitOne(f"sqrt needs constant term 1, got {a.constant_term}")
    top = sum(a.box)
    r = TruncatedSeries.one(a.vars, a.box)
    m = 1
    while m <= top:
        m2 = min(2 * m, top + 1)
        inv = invert_unit(r, max_degree=m2 - 1)
        q = (a.truncate_total_degree(m2 - 1) * inv).truncate_total_degree(m2 - 1)
        r = ((r + q) * Fraction(1, 2)).truncate_total_degree(m2 - 1)
        m = m2
    return r


def _monomial_factor(b: TruncatedSeries) -> tuple[int, ...]:
    supp = np.nonzero(b._num != 0)
    if len(supp[0]) == 0 and b.vars:
        raise NotAUnit("division by a series that vanishes in its box")
    if not b.vars:
        return ()
    m = tuple(int(ax.min()) for ax in supp)
    if b._num[m] == 0:
        raise NotAUnit(f"denominator is not a monomial times a unit (lowest corner {m} is empty)")
    return m


def exact_div(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """``a / b`` where ``b`` is a monomial times a unit dividing ``a``."""
    a._check_vars(b)
    if b.constant_term != 0:
        return a * invert_unit(b)
    m = _monomial_factor(b)
    box = tuple(min(x, y) for x, y in zip(a.box, b.box))
    at = a.truncate(box)
    # every coefficient of a lying below the monomial must vanish
    below = np.zeros(at._num.shape, dtype=bool)
    idx = np.indices(at._num.shape)
    for axis, e in enumerate(m):
        below |= idx[axis] < e
    if np.any(at._num[below] != 0):
        raise NotDivisible(f"numerator is not divisible by monomial {dict(zip(a.vars, m))}")
    aq = at.shift(m)
    bq = b.truncate(box).shift(m)
    return aq * invert_unit(bq)


def derive(a: TruncatedSeries, var: str) -> TruncatedSeries:
    if var not in a.vars:
        raise VarMismatch(f"{var!r} not in {a.vars}")
    ax = a.vars.index(var)
    if a.box[ax] == 0:
        raise BoxOverflow(f"box has no room in {var} for a derivative")
    num = np.moveaxis(a._num, ax, 0)[1:]
    weights = np.arange(1, a.box[ax] + 1, dtype=object).reshape((-1,) + (1,) * (a._num.ndim - 1))
    num = np.moveaxis(num * weights, 0, ax).copy()
    box = list(a.box)
    box[ax] -= 1
    return TruncatedSeries._raw(a.vars, box, num, a._den)


class DegreeBound:
    """Certified upper bound ``deg_var <= const + sum(coef_v * e_v)``.

    Used to justify evaluating a series at a constant: if for every kept
    exponent vector the bound does not exceed the box, evaluation is a
    finite exact sum.
    """

    def __init__(self, const=0, **coefs):
        self.const = Fraction(const)
        self.coefs = {k: Fraction(v) for k, v in coefs.items()}

    def __call__(self, exps: Mapping[str, int]) -> int:
        val = self.const + sum(c * exps.get(v, 0) for v, c in self.coefs.items())
        return math.floor(val)

    def __repr__(self):
        parts = [str(self.const)] + [f"{c}*{v}" for v, c in self.coefs.items()]
        return "deg <= " + " + ".join(parts)


def _subst_value(a, var, value, bound, keep_box):
    ax = a.vars.index(var)
    others = tuple(v for v in a.vars if v != var)
    if bound is None:
        raise BoxOverflow(
            f"evaluating {var}={value} needs a certified degree bound in {var}; pass bound="
        )
    if isinstance(bound, int):
        bound = DegreeBound(bound)
    box = [b for v, b in zip(a.vars, a.box) if v != var]
    if keep_box is not None:
        box = [min(b, keep_box.get(v, b)) for v, b in zip(others, box)]
    limit = a.box[ax]
    while bound(dict(zip(others, box))) > limit:
        cands = [(bound.coefs.get(v, 0) * b, i) for i, (v, b) in enumerate(zip(others, box))
                 if bound.coefs.get(v, 0) > 0 and b > 0]
        if not cands or keep_box is not None:
            raise BoxOverflow(f"box {a.box} cannot certify evaluation at {var}={value} ({bound})")
        _, i = max(cands)
        box[i] -= 1
    f = _as_fraction(value)
    num = np.moveaxis(a._num, ax, 0)
    den = a._den
    if f == 1:
        tot = num.sum(axis=0)
    else:
        p, qd = f.numerator, f.denominator
        n = a.box[ax]
        tot = _zeros(num.shape[1:])
        for k in range(n + 1):
            tot = tot + num[k] * (p ** k * qd ** (n - k))
        den = den * qd ** n
    if not isinstance(tot, np.ndarray):
        tot = np.array(tot, dtype=object)
    sl = tuple(slice(0, b + 1) for b in box)
    return TruncatedSeries._raw(others, box, np.array(tot[sl], dtype=object), den)


def _subst_monomial(a, var, target: Mapping[str, int], coef: Fraction):
    """``var := coef * prod(w**k)``; ``target`` may contain ``var`` (exponent 1)
    or introduce one new variable in place of ``var``."""
    newvars = list(a.vars)
    newbox = list(a.box)
    ax = a.vars.index(var)
    for w in target:
        if w not in a.vars and w != var:
            if w in newvars:
                continue
            # new variable replaces var in position
            if var in target:
                raise IllegalComposition("cannot introduce a new variable while keeping the old one")
            newvars[ax] = w
    keeps_var = var in target
    if keeps_var and target[var] != 1:
        raise IllegalComposition(f"{var} := {var}^{target[var]}*... is not supported")
    if not keeps_var and newvars[ax] == var:
        # var disappears
        del newvars[ax]
        del newbox[ax]
    bvar = a.box[ax]
    # box of the result
    resbox = {}
    for v, b in zip(newvars, newbox if len(newbox) == len(newvars) else [0] * len(newvars)):
        resbox[v] = b
    for v in newvars:
        if v in a.vars and v != var:
            resbox[v] = a.box[a.vars.index(v)]
    if keeps_var:
        resbox[var] = bvar
    for w, k in target.items():
        if w == var:
            continue
        if w not in a.vars:
            resbox[w] = k * (bvar + 1) - 1
        elif not keeps_var:
            resbox[w] = min(resbox[w], k * (bvar + 1) - 1)
    rb = tuple(resbox[v] for v in newvars)
    out = _zeros(tuple(b + 1 for b in rb))
    num = a._num
    cp, cq = coef.numerator, coef.denominator
    nvar = bvar
    den = a._den * cq ** nvar
    for idx in zip(*np.nonzero(num != 0)):
        e = dict(zip(a.vars, (int(i) for i in idx)))
        t = e[var]
        ne = {v: e.get(v, 0) for v in newvars}
        if not keeps_var:
            ne.pop(var, None)
        for w, k in target.items():
            if w == var:
                continue
            ne[w] = ne.get(w, 0) + k * t
        tgt = tuple(ne.get(v, 0) for v in newvars)
        if all(x <= b for x, b in zip(tgt, rb)):
            out[tgt] += num[idx] * cp ** t * cq ** (nvar - t)
    return TruncatedSeries._raw(newvars, rb, out, den)


def substitute(a: TruncatedSeries, var: str, replacement, bound=None, keep_box=None) -> TruncatedSeries:
    """Substitute for ``var`` in ``a``.

    ``replacement`` may be

    * a variable name (``"x"``) or a monomial given as a mapping
      ``{"s": 2}`` / ``{"q": 1, "z": 1}`` -- an exponent remap;
    * a :class:`TruncatedSeries` with zero constant term -- composition;
    * a rational constant -- evaluation, which requires ``bound`` (an int or
      :class:`DegreeBound`) certifying the true degree in ``var``.
    """
    if var not in a.vars:
        raise VarMismatch(f"{var!r} not in {a.vars}")
    if isinstance(replacement, str):
        if replacement == var:
            return a
        return _subst_monomial(a, var, {replacement: 1}, Fraction(1))
    if isinstance(replacement, Mapping):
        return _subst_monomial(a, var, dict(replacement), Fraction(1))
    if isinstance(replacement, TruncatedSeries):
        return _compose(a, var, replacement)
    return _subst_value(a, var, replacement, bound, keep_box)


def _compose(a: TruncatedSeries, var: str, r: TruncatedSeries) -> TruncatedSeries:
    a._check_vars(r)
    if r.constant_term != 0:
        raise IllegalComposition(
            f"substituting a series with nonzero constant term {r.constant_term} for {var}"
        )
    ax = a.vars.index(var)
    n = a.box[ax]
    box = [min(x, y) for x, y in zip(a.box, r.box)]
    # terms r**k for k > n are unknown; shrink until r**(n+1) vanishes in box
    rvars = [i for i in range(len(a.vars)) if np.any(np.moveaxis(r._num, i, 0)[1:] != 0)]
    while True:
        rt = r.truncate(box)
        if (rt ** (n + 1)).is_zero():
            break
        cands = [i for i in rvars if box[i] > 0]
        if not cands:
            raise BoxOverflow("composition cannot be certified in any box")
        i = max(cands, key=lambda j: box[j])
        box[i] -= 1
    rt = r.truncate(box)
    # Horner in var; the k-th slab holds the var-free coefficient of var**k
    num = np.moveaxis(a._num, ax, 0)
    result = TruncatedSeries.zero(a.vars, box)
    for k in range(n, -1, -1):
        slab = _zeros(tuple(b + 1 for b in box))
        sub = num[k]
        expanded = np.expand_dims(sub, ax)
        sl = tuple(slice(0, min(s, b + 1)) for s, b in zip(expanded.shape, box))
        slab[sl] = expanded[sl]
        ck = TruncatedSeries._raw(a.vars, box, slab, a._den)
        result = result * rt + ck
    return result


def even_part(a: TruncatedSeries, svar: str = "s", xvar: str = "x") -> TruncatedSeries:
    """Map a series in ``s`` with vanishing odd part to one in ``x = s**2``."""
    if svar not in a.vars:
        raise VarMismatch(f"{svar!r} not in {a.vars}")
    if xvar in a.vars:
        raise VarMismatch(f"{xvar!r} already present")
    ax = a.vars.index(svar)
    num = np.moveaxis(a._num, ax, 0)
    if np.any(num[1::2] != 0):
        raise OddPartNonzero("odd part in the square-root proxy does not vanish")
    even = np.moveaxis(num[0::2], 0, ax).copy()
    vars = tuple(xvar if v == svar else v for v in a.vars)
    box = list(a.box)
    box[ax] = a.box[ax] // 2
    return TruncatedSeries._raw(vars, box, even, a._den)


def odd_even_split(a: TruncatedSeries, svar: str = "s") -> tuple[TruncatedSeries, TruncatedSeries]:
    ax = a.vars.index(svar)
    num = np.moveaxis(a._num, ax, 0).copy()
    ev = num.copy()
    ev[1::2] = 0
    od = num.copy()
    od[0::2] = 0
    mk = lambda arr: TruncatedSeries._raw(a.vars, a.box, np.moveaxis(arr, 0, ax).copy(), a._den)
    return mk(ev), mk(od)


# -- expression trees -----------------------------------------------------------
#
# A tree is a nested tuple: ("const", Fraction), ("var", name), ("neg", t),
# ("add"|"sub"|"mul"|"div", t1, t2), ("sqrt", t), ("pow", t, n).

class ExprError(SeriesError):
    """A series operation failed inside an expression tree."""

    def __init__(self, path: str, cause: Exception | None = None):
        super().__init__(path if cause is None else f"at {path}: {type(cause).__name__}: {cause}")
        self.path = path
        self.cause = cause


_BINOPS = {ast.Add: "add", ast.Sub: "sub", ast.Mult: "mul", ast.Div: "div"}


def parse_expr(text: str):
    """Parse arithmetic text (``+ - * / **``, ``sqrt()``) into a tree."""
    node = ast.parse(text, mode="eval").body

    def conv(n):
        if isinstance(n, ast.BinOp):
            if isinstance(n.op, ast.Pow):
                exp = n.right
                sign = 1
                if isinstance(exp, ast.UnaryOp) and isinstance(exp.op, ast.USub):
                    sign, exp = -1, exp.operand
                if not (isinstance(exp, ast.Constant) and isinstance(exp.value, int)):
                    raise ValueError("only integer powers are allowed")
                return ("pow", conv(n.left), sign * exp.value)
            return (_BINOPS[type(n.op)], conv(n.left), conv(n.right))
        if isinstance(n, ast.UnaryOp):
            if isinstance(n.op, ast.USub):
                return ("neg", conv(n.operand))
            if isinstance(n.op, ast.UAdd):
                return conv(n.operand)
        if isinstance(n, ast.Constant) and isinstance(n.value, int):
            return ("const", Fraction(n.value))
        if isinstance(n, ast.Name):
            return ("var", n.id)
        if isinstance(n, ast.Call) and isinstance(n.func, ast.Name) and n.func.id == "sqrt" and len(n.args) == 1:
            return ("sqrt", conv(n.args[0]))
        raise ValueError(f"unsupported syntax: {ast.dump(n)}")

    return conv(node)


def eval_expr(tree, vars: Sequence[str], box: Sequence[int], env: Mapping | None = None) -> TruncatedSeries:
    """Evaluate a tree bottom-up over the ring ``Q[[vars]]`` truncated to ``box``.

    Leaves named in ``env`` take the bound series or rational; other names must
    be ring variables.  Failures are re-raised as :class:`ExprError` carrying
    the path of the failing node.
    """
    if isinstance(tree, str):
        tree = parse_expr(tree)
    vars = tuple(vars)
    box = tuple(box)
    env = dict(env or {})
    cache: dict = {}

    def leaf(name):
        if name in env:
            val = env[name]
            if isinstance(val, TruncatedSeries):
                return val
            return TruncatedSeries.const(vars, box, val)
        if name in vars:
            return TruncatedSeries.var(vars, box, name)
        raise VarMismatch(f"unbound name {name!r}")

    def ev(t, path):
        key = t
        if key in cache:
            return cache[key]
        op = t[0]
        try:
            if op == "const":
                res = TruncatedSeries.const(vars, box, t[1])
            elif op == "var":
                res = leaf(t[1])
            elif op == "neg":
                res = -ev(t[1], path + ".neg")
            elif op in ("add", "sub", "mul", "div"):
                l = ev(t[1], path + f".{op}[0]")
                r = ev(t[2], path + f".{op}[1]")
                if op == "add":
                    res = l + r
                elif op == "sub":
                    res = l - r
                elif op == "mul":
                    res = l * r
                else:
                    res = exact_div(l, r)
            elif op == "sqrt":
                res = sqrt_unit(ev(t[1], path + ".sqrt"))
            elif op == "pow":
                base = ev(t[1], path + ".pow")
                n = t[2]
                res = base ** n if n >= 0 else exact_div(TruncatedSeries.one(base.vars, base.box), base ** (-n))
            else:
                raise ValueError(f"unknown node {op!r}")
        except ExprError:
            raise
        except SeriesError as exc:
            raise ExprError(path, exc) from exc
        cache[key] = res
        return res

    return ev(tree, "root")


# -- text dump --------------------------------------------------------------------

def dump(a: TruncatedSeries) -> str:
    """One ``e1,e2,...<TAB>p/q`` line per nonzero term, lexicographic order.

    A leading comment records variables and box.
    """
    lines = [f"# vars={','.join(a.vars)} box={','.join(map(str, a.box))}"]
    for e, c in sorted(a.coeffs.items()):
        lines.append(f"{','.join(map(str, e))}\t{c.numerator}/{c.denominator}")
    return "\n".join(lines) + "\n"


def load(text: str) -> TruncatedSeries:
    vars: tuple = ()
    box: tuple = ()
    coeffs = {}
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for part in line[1:].split():
                k, _, v = part.partition("=")
                if k == "vars":
                    vars = tuple(v.split(","))
                elif k == "box":
                    box = tuple(int(b) for b in v.split(","))
            continue
        e, c = line.split("\t")
        coeffs[tuple(int(t) for t in e.split(","))] = Fraction(c)
    if not vars:
        raise ValueError("missing '# vars=... box=...' header")
    return TruncatedSeries(vars, box, coeffs)


def rescale(a: TruncatedSeries, var: str, c) -> TruncatedSeries:
    """Substitute ``var := c * var`` (multiply each coefficient by ``c**e``)."""
    if var not in a.vars:
        raise VarMismatch(f"{var!r} not in {a.vars}")
    f = _as_fraction(c)
    ax = a.vars.index(var)
    n = a.box[ax]
    p, qd = f.numerator, f.denominator
    w = np.array([p ** e * qd ** (n - e) for e in range(n + 1)], dtype=object)
    w = w.reshape((-1,) + (1,) * (a._num.ndim - 1))
    num = np.moveaxis(np.moveaxis(a._num, ax, 0) * w, 0, ax).copy()
    return TruncatedSeries._raw(a.vars, a.box, num, a._den * qd ** n)


def embed(a: TruncatedSeries, vars: Sequence[str], box: Sequence[int]) -> TruncatedSeries:
    """View ``a`` inside a larger variable set (new variables get exponent 0)."""
    vars = tuple(vars)
    box = tuple(box)
    for v in a.vars:
        if v not in vars:
            raise VarMismatch(f"{v!r} missing from {vars}")
    coeffs = {}
    for e, c in a.coeffs.items():
        d = dict(zip(a.vars, e))
        coeffs[tuple(d.get(v, 0) for v in vars)] = c
    own = dict(zip(a.vars, a.box))
    newbox = tuple(min(b, own[v]) if v in own else b for v, b in zip(vars, box))
    return TruncatedSeries(vars, newbox, coeffs)
