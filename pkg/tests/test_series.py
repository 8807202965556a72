from fractions import Fraction

import pytest

from convexpoly.errors import (
    BoxOverflow,
    NotAUnit,
    NotDivisible,
    OddPartNonzero,
    OutsideBox,
    SeriesError,
    VarMismatch,
)
from convexpoly.series import (
    DegreeBound,
    TruncatedSeries as T,
    derive,
    eval_expr,
    even_part,
    exact_div,
    invert_unit,
    parse_expr,
    substitute,
)

def ev(text, vars=("x",), box=(8,)):
    return eval_expr(parse_expr(text), vars, box)


def naive_mul(a: T, b: T) -> T:
    out = {}
    for ea, ca in a.coeffs.items():
        for eb, cb in b.coeffs.items():
            e = tuple(i + j for i, j in zip(ea, eb))
            if all(k <= m for k, m in zip(e, a.box)):
                out[e] = out.get(e, 0) + ca * cb
    return T(a.vars, a.box, out)


def test_basic_arithmetic():
    x = T.var(("x",), (4,), "x")
    assert (1 + x) * (1 - x) == 1 - x * x
    yz = ev("(1-y*z)**2", ("y", "z"), (3, 3))
    assert yz == T(("y", "z"), (3, 3), {(0, 0): 1, (1, 1): -2, (2, 2): 1})
    g = ev("x*y/(1-y*z)", ("x", "y", "z"), (1, 3, 2))
    assert g.coeffs == {(1, 1, 0): 1, (1, 2, 1): 1, (1, 3, 2): 1}
    assert ev("1/(1-4*x)").coeff((5,)) == 1024
    assert ev("1/((1-y*z)**2-x)", ("x", "y", "z"), (3, 3, 3)).constant_term == 1
    assert ev("(x**2+x**3)/x", box=(5,)).coeffs == {(1,): 1, (2,): 1}
    assert ev("sqrt(1)") == T.one(("x",), (8,))


def test_kernel_root_constant_terms():
    z0 = ev("(1+y-x-sqrt((1+y-x)**2-4*y))/(2*y)", ("x", "y"), (5, 5))
    assert z0.constant_term == 1
    at0 = ev("sqrt((1+y-x)**2-4*y)", ("x", "y"), (0, 6))
    assert at0 == ev("1-y", ("x", "y"), (0, 6))


def test_derive_and_substitute_examples():
    x = ev("x**2", box=(4,))
    assert derive(x, "x") == ev("2*x", box=(3,))
    f = ev("q**4*(1+x)", ("x", "q"), (3, 6))
    assert derive(f, "q") == ev("4*q**3*(1+x)", ("x", "q"), (3, 5))
    g = ev("x*y/(1-y*z)", ("x", "y", "z"), (4, 4, 4))
    assert substitute(g, "y", "x") == ev("x**2/(1-x*z)", ("x", "z"), (4, 4)).truncate(substitute(g, "y", "x").box)
    h = ev("q**4*x*y", ("x", "y", "q"), (2, 2, 5))
    assert substitute(h, "q", 1, bound=DegreeBound(5)) == ev("x*y", ("x", "y"), (2, 2))


def test_s_proxy_even_part():
    s = ev("1/(1+s) + 1/(1-s)", ("s",), (8,))
    assert even_part(s) == ev("2/(1-x)", ("x",), (4,))
    with pytest.raises(OddPartNonzero):
        even_part(ev("1/(1+s)", ("s",), (8,)))


def test_error_paths():
    with pytest.raises(SeriesError) as exc:
        ev("1/(x-x**2)")
    assert "root" in str(exc.value)
    with pytest.raises(NotAUnit):
        invert_unit(ev("x"))
    with pytest.raises(NotDivisible):
        exact_div(ev("1+x"), ev("x"))
    with pytest.raises(OutsideBox):
        ev("x").coeff((9,))
    with pytest.raises(VarMismatch):
        ev("x") + ev("y", ("y",))
    with pytest.raises(BoxOverflow):
        substitute(ev("1/(1-x)"), "x", 1, bound=DegreeBound(9))


def test_big_coefficients_survive_packing():
    big = 10 ** 40
    a = T(("x",), (3,), {(0,): big, (1,): -big, (3,): Fraction(1, 3)})
    assert a * a == naive_mul(a, a)
    assert (a * a).coeff((0,)) == big * big
