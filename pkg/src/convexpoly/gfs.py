"""Catalog of closed-form generating functions and their residual checks.

Every entry is built from an expression string evaluated by
:func:`convexpoly.series.eval_expr`, with algebraic points (kernel roots)
bound as series.  Half-integer powers of ``x`` go through the ``s``-proxy
``x = s**2``: such entries are expanded in ``s`` and folded back with
:func:`convexpoly.series.even_part`, which fails loudly if an odd power of
``s`` survives.

Variable conventions: ``x`` marks columns, ``y`` rows, ``z`` the first column
(cells minus one), ``t`` cells, ``q`` the statistic of the family.  For the
five-variable degree object ``q``, ``p`` and ``t`` mark vertices of degree
two, three and four.

Where a printed form and the geometry disagree, the entry offers both a
``"printed"`` variant (verbatim transcription) and a ``"corrected"`` one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from .errors import BoxOverflow, ConvexPolyError, SeriesError, UnknownName
from .series import (
    DegreeBound,
    TruncatedSeries,
    embed,
    eval_expr,
    even_part,
    exact_div,
    parse_expr,
    substitute,
)

__all__ = [
    "GfEntry",
    "CATALOG",
    "ALGEBRAIC_POINTS",
    "EQUATIONS",
    "build",
    "algebraic_point",
    "algebraic_point_residual",
    "kernel_residual",
    "catalog_names",
    "normalize_box",
    "deg23_series",
    "deg23_d4_series",
    "outer_series_from_j",
    "at_diagonal",
]


@lru_cache(maxsize=None)
def _tree(text: str):
    return parse_expr(text)


def _ev(text: str, vars, box, **env) -> TruncatedSeries:
    return eval_expr(_tree(text), vars, box, env)


def _x_from_s(vars, box) -> TruncatedSeries:
    """The series ``s**2`` playing the role of ``x`` under the s-proxy."""
    return TruncatedSeries.monomial(vars, box, {"s": 2})


def _s_box(box: Mapping[str, int]) -> dict:
    out = {v: b for v, b in box.items() if v != "x"}
    out["s"] = 2 * box["x"] + 1
    return out


def _fold(series_in_s: TruncatedSeries, vars: Sequence[str]) -> TruncatedSeries:
    """Fold an s-proxy result back to ``x`` and reorder to ``vars``."""
    folded = even_part(series_in_s, "s", "x")
    if folded.vars == tuple(vars):
        return folded
    coeffs = {}
    for e, c in folded.coeffs.items():
        d = dict(zip(folded.vars, e))
        coeffs[tuple(d[v] for v in vars)] = c
    own = dict(zip(folded.vars, folded.box))
    return TruncatedSeries(vars, tuple(own[v] for v in vars), coeffs)


# -- expression texts -------------------------------------------------------------

CPBU = "x*y*(1-y*z)/((1-y*z)**2-x)"
Z0 = "(1+y-x-sqrt((1+y-x)**2-4*y))/(2*y)"
CPU = (
    "(x*y*(Z0-z) + x**2*y**2*z*(1-z)/((1-y*z)**2-x)"
    " - x**2*y**2*Z0*(1-Z0)/((1-y*Z0)**2-x))/((1-z)*(1-y*z)+x*z)"
)
CPU_AT1 = "y*(Z0-1) + x*y**2*Z0*(Z0-1)/((1-y*Z0)**2-x)"
CP_XY = (
    "2*x*y/(x-(1-y)**2)*CU1"
    " - s*y/((1+s)*(1+s-y))*CUp + s*y/((1-s)*(1-s-y))*CUm"
    " + x*y**2/(2*(1+s)*(1+s-y)**2)*CBp + x*y**2/(2*(1-s)*(1-s-y)**2)*CBm"
    " - x*(1-y)*y/(x-(1-y)**2)"
)
CP_HALF = (
    "x**2*(1-8*x+21*x**2-19*x**3+4*x**4)/((1-2*x)*(1-4*x)**2)"
    " - 2*x**4/((1-4*x)*sqrt(1-4*x))"
)
CP_HALF_CLASSICAL = "x**2*(1-6*x+11*x**2-4*x**3)/(1-4*x)**2 - 4*x**4/((1-4*x)*sqrt(1-4*x))"

_RF = "((1+x-y)**2-4*x)"
F_U_Z1 = (
    f"x**2*y/sqrt({_RF})"
    " + x*y*(1-z)*(1-y*z)*(1-x-y*z)/((y*z**2-(1-x+y)*z+1)*((1-y*z)**2-x))"
)
# The leading term also carries the kernel in its denominator.
F_U_Z1_FIXED = (
    f"x**2*y/(sqrt({_RF})*(y*z**2-(1-x+y)*z+1))"
    " + x*y*(1-z)*(1-y*z)*(1-x-y*z)/((y*z**2-(1-x+y)*z+1)*((1-y*z)**2-x))"
)
F_U_DQ = (
    f"x*y*(x**2-2*x*y+y**2+2*x+2*y-3)/(2*sqrt({_RF})**3)"
    f" + x*y*((1+x+y)*(x-y)**2+4*x*y-5*x-5*y+3)/(2*{_RF}**2)"
)
F_AT_11 = (
    "x*y*(2*x**2*(2-x)-x**2*(3-x)*(1-y)-2*x*(2-x)*(1-y)**2+(1+x)*(1-y)**3)"
    f"/{_RF}**2 - 4*x**2*y**2/sqrt({_RF})**3"
)
F_DZ = (
    "x*y**2*(x**3-2*x**2*y+x*y**2+x**2+3*y**2-5*x-6*y+3)"
    f"/{_RF}**2 - 2*x*y**2*(1-x-y)/sqrt({_RF})**3"
)
F_DQ = (
    "8*x**3*y**2*(4*x*(x**2+6*x-1)+4*x*(5*x+11)*(y-x-1)+(6*x**2+29*x+17)*(y-x-1)**2)"
    f"/{_RF}**4"
    " + x**2*y**2*(y-x-1)**3*(40*x*(2*x+1)+2*(x**2+11*x-8)*(y-x-1)+(y-x-1)**2*(y+x-1))"
    f"/{_RF}**4"
    f" + 4*x**2*y**2*(4-3*(x+y)-(x-y)**2)/sqrt({_RF})**5"
)
F_DQ_UNI = (
    "(32*x**4+80*x**3-230*x**2+116*x-15)*x**4/(1-4*x)**4"
    " - 8*(3*x-2)*x**4/sqrt(1-4*x)**5"
)

E_BU = "q**4*x*y*(1-y*z)/((1-y*z)**2-x*(1+(q-1)*y*z)**2)"
_RE = "((1+y-x-(q-1)**2*x*y)**2-4*y*(1+(q-1)*x)**2)"
E_Z0 = f"(1+y-x-(q-1)**2*x*y-sqrt({_RE}))/(2*y*(1+(q-1)*x))"
E_Z0_PRINTED = f"(1+y-x-(q-1)**2*x*y-sqrt({_RE}))/(2*(1+(q-1)*x))"
E_U_AT1 = (
    "-q**3*y*(1-x-y*Z0-(q-1)*x*y*Z0)*(1-y*Z0)*(1-Z0)"
    "/(((1-y*Z0)**2-x*(1+(q-1)*y*Z0)**2)*(1+(q-1)*y*Z0))"
)
_EDEN = "((1-y*z)**2-x*(1+(q-1)*y*z)**2)"
_EDEN0 = "((1-y*Z0)**2-x*(1+(q-1)*y*Z0)**2)"
_EKER_PRINTED = "(1-x*(z+q-1)*(1+(q-1)*y*z)/((1-y*z)*(1-z)))"
E_U_PRINTED = (
    f"q**4*x*y*(1-x-y*z-(q-1)*x*y*z)/({_EKER_PRINTED}*{_EDEN})"
    " - q**4*x*y*(1+(q-1)*y*z)*(1-x-y*Z0-(q-1)*x*y*Z0)*((1-y*Z0)*(1-Z0)/((1-y*z)*(1-z)))"
    f"/({_EKER_PRINTED}*{_EDEN0}*(1+(q-1)*y*Z0))"
)
# Kernel multiplied through by (1-yz)(1-z), with the sign that the
# recurrence for the unimodal-top class actually produces.
E_U = (
    f"(q**4*x*y*(1-x-y*z-(q-1)*x*y*z)*(1-y*z)*(1-z)/{_EDEN} + q*x*(1+(q-1)*y*z)*EU1)"
    "/((1-y*z)*(1-z)+x*(z+q-1)*(1+(q-1)*y*z))"
)
E_FULL = (
    f"-q**4*x**2*y**2*(2+(x+y+1)*(q-1)-x*y*(q-1)**3)**2/sqrt({_RE})**3"
    " + q**4*x*y*(-x**3*y+2*x**2*y**2-x*y**3-x**3-x**2*y-x*y**2-y**3+3*x**2+5*x*y+3*y**2-3*x-3*y+1)"
    f"/{_RE}**2"
    f" - 8*q**4*x**2*y**2*(q-1)*(x**2-x*y+y**2-2*x-2*y+1)/{_RE}**2"
    " - q**4*x**2*y**2*(q-1)**2*(x**3+x**2*y+x*y**2+y**3+x**2-44*x*y+y**2-5*x-5*y+3)"
    f"/{_RE}**2"
    " + q**4*x**3*y**3*(q-1)**3*(8*(2*y+2*x+3)+(3*x**2+5*x*y+3*y**2+5*x+5*y+4)*(q-1))"
    f"/{_RE}**2"
    f" - q**4*x**4*y**4*(q-1)**5*(8+3*(x+y+1)*(q-1)-x*y*(q-1)**3)/{_RE}**2"
)
E_DQ_UNI = (
    "4*x**2*(8*x**5-26*x**4+56*x**3-37*x**2+10*x-1)/(4*x-1)**3"
    " - 4*x**4*(4*x**2-18*x+5)/sqrt(1-4*x)**5"
)
D_DEG23 = (
    "(q**12-6*q**11+11*q**10-6*q**9+6*q**8-12*q**7-4*q**6+2*q**5+9*q**4+6*q**3-4*q**2-2*q+1)*q**4"
    "/((q**2+q+1)**2*(q**2-3*q+1)**2*(q**2-q-1)**2)"
    " + (q**3-2*q**2-1)**2*q**6/((q**2-q-1)*sqrt((q**2+q+1)*(q**2-3*q+1))**3)"
)

J_BU = "q**4*x*y*(1-q**2*y*z)/((1-q**2*y*z)**2-q**2*(1+q*y*z-q**2*y*z)**2*x)"
_AL = "(1-q**2*y*z)"
_BE = "(1+q*(1-q)*y*z)"
_JU_TAIL = (
    f"q**4*x*y*(2*(1-z)*{_AL}**2+q*(1-q**2*y*z)*{_BE}*(1-2*q*(1-z)-q*{_BE})*x-q**3*(1-q)*{_BE}**3*x**2)"
    f"/(2*((1-z)*{_AL}+q*(1-q+q*z)*{_BE}*x)*({_AL}**2-q**2*{_BE}**2*x))"
    " + q**5*x**2*y*(1+q+q**2*(1-q)*y-q**2*(q-1)*(1-(1-q)**2*y)*x)*{be}"
    f"/(2*((1-z)*{_AL}+q*(1-q+q*z)*{_BE}*x)*sqrt((1+q**2*(y-x)-q**2*(1-q)**2*x*y)**2-4*q**2*y*{{rad}}))"
)
J_U = _JU_TAIL.format(be=_BE, rad=f"{_BE}**2")
# Radicand of the kernel root (as in the displayed root) instead of beta**2.
J_U_ROOT_RADICAND = _JU_TAIL.format(be=_BE, rad="(1+q*(1-q)*x)**2")
J_Z0 = (
    "(1+q**2*(y-x)-q**2*(1-q)**2*x*y-sqrt((1+q**2*(y-x)-q**2*(1-q)**2*x*y)**2"
    "-4*q**2*y*(1+q*(1-q)*x)**2))/(2*q**2*y*(1+q*(1-q)*x))"
)
J_ZPM = "(1+q*(1-q)*x + SGN*q*s*sqrt(1+(1-q**2)*x))/(1-q**2*x)"
J_FULL = (
    "q**2*y*(1-q**2*y)/2"
    " + (zp*(1-q+q*zp)*(1-q**2*y*zm)*JUp - zm*(1-q+q*zm)*(1-q**2*y*zp)*JUm"
    " - q**2*y*zp**2*(1-q**2*y*zm)*(1-zp)/(2*(1-q**2*y*zp))*JBp"
    " + q**2*y*zm**2*(1-q**2*y*zp)*(1-zm)/(2*(1-q**2*y*zm))*JBm)/(zp-zm)"
)
# Right side of the full-class outer-site equation times (1-z)**2, without
# its J(1) and first-column-derivative terms.
J_ROOT_SIDE = (
    "(1-z)**2*(q**4*x*y/(1-q**2*y*z) + q**4*x*y**2*z**2/(1-q**2*y*z)**2*JB"
    " + 2*q**3*x*y*z/(1-q**2*y*z)*JU) - 2*q**2*x*y*z*(1-z)/(1-q**2*y*z)*(JU-JU1)"
)
J_OUTER_A = (
    "q**4*(2-q-18*q**2-q**3+83*q**4+51*q**5-229*q**6-250*q**7+362*q**8+597*q**9-297*q**10"
    "-868*q**11+124*q**12+828*q**13-48*q**14-544*q**15+55*q**16+312*q**17-200*q**18"
    "+48*q**19-4*q**20)"
)
J_OUTER_B = (
    "(1+q-q**2)*(1-2*q-2*q**2)*(2-2*q**3+q**4)*(1+2*q-4*q**3-5*q**4+3*q**6+2*q**7-2*q**8)"
    "*(1-2*q-4*q**2+4*q**3+11*q**4-4*q**5-13*q**6+10*q**7-2*q**8)"
)
J_OUTER_UNI = (
    f"{J_OUTER_A}/({J_OUTER_B})"
    " - q**5*(1+2*q**2-q**3)*(1+3*q-2*q**2)"
    "/((1+q-q**2)*(2-2*q**3+q**4)*(1-2*q-2*q**2)*sqrt((1+q+q**2)*(1-3*q+q**2)))"
)
J_DQ_UNI = (
    "-2*(36*x**6-13*x**5-156*x**4+201*x**3-98*x**2+22*x-2)*x**2/((1-4*x)**3*(1-2*x))"
    " + 4*x**4*(x+2)*(8*x-3)/sqrt(1-4*x)**5"
)


# -- algebraic points -----------------------------------------------------------------

def _z0(box: Mapping[str, int]) -> TruncatedSeries:
    return _ev(Z0, ("x", "y"), (box["x"], box["y"]))


def _e_z0(box: Mapping[str, int], printed: bool = False) -> TruncatedSeries:
    vars = ("x", "y", "q")
    return _ev(E_Z0_PRINTED if printed else E_Z0, vars, tuple(box[v] for v in vars))


def _j_z0(box: Mapping[str, int]) -> TruncatedSeries:
    vars = ("x", "y", "q")
    return _ev(J_Z0, vars, tuple(box[v] for v in vars))


def _zpm(sign: int, box: Mapping[str, int]) -> TruncatedSeries:
    return _ev("1/(1+SGN*s)", ("s",), (box["s"],), SGN=sign)


def _j_zpm(sign: int, box: Mapping[str, int]) -> TruncatedSeries:
    vars = ("s", "q")
    b = tuple(box[v] for v in vars)
    return _ev(J_ZPM, vars, b, SGN=sign, x=_x_from_s(vars, b))


ALGEBRAIC_POINTS = {
    "z0": (("x", "y"), _z0, "(1-z)*(1-y*z)+x*z"),
    "z_plus": (("s",), lambda b: _zpm(1, b), "z*(1+s)-1"),
    "z_minus": (("s",), lambda b: _zpm(-1, b), "z*(1-s)-1"),
    "z0_corners": (("x", "y", "q"), _e_z0, "(1-y*z)*(1-z)+x*(z+q-1)*(1+(q-1)*y*z)"),
    "z0_outer": (("x", "y", "q"), _j_z0,
                 "(1-z)*(1-q**2*y*z)*(1-q**2*x)-q**3*x*y*z*(1-z)+q*x*(1+q*(1-q)*y*z)"),
    "zpm_outer": (("s", "q"), lambda b: _j_zpm(1, b), "(1-q**2*x)*(1-z)**2-q*x*(q-2+2*z)"),
}


def algebraic_point(name: str, box) -> TruncatedSeries:
    """Series expansion of a kernel root (``zpm_outer`` is the ``+`` root)."""
    if name not in ALGEBRAIC_POINTS:
        raise UnknownName(f"unknown algebraic point {name!r}; known: {sorted(ALGEBRAIC_POINTS)}")
    vars, fn, _ = ALGEBRAIC_POINTS[name]
    b = normalize_box(vars, box)
    return fn(dict(zip(vars, b)))


def algebraic_point_residual(name: str, box) -> TruncatedSeries:
    """The defining polynomial evaluated at the root (zero within the box)."""
    vars, _, poly = ALGEBRAIC_POINTS[name] if name in ALGEBRAIC_POINTS else (None, None, None)
    if vars is None:
        raise UnknownName(f"unknown algebraic point {name!r}")
    z = algebraic_point(name, box)
    env = {"z": z}
    if "s" in vars:
        env["x"] = _x_from_s(z.vars, z.box)
    return _ev(poly, z.vars, z.box, **env)


# -- catalog --------------------------------------------------------------------------

@dataclass(frozen=True)
class GfEntry:
    """One closed form: its variables, how to build it and its degree certificates.

    ``degree_bounds`` maps a variable to a :class:`DegreeBound` certifying the
    largest exponent of that variable in terms of the others, which licenses
    setting it to a constant later on.
    """

    name: str
    vars: tuple[str, ...]
    description: str
    builder: Callable[[dict, str], TruncatedSeries]
    degree_bounds: Mapping[str, DegreeBound] = field(default_factory=dict)
    variants: tuple[str, ...] = ("printed",)

    @property
    def default_variant(self) -> str:
        return self.variants[0]


def normalize_box(vars: Sequence[str], box) -> tuple[int, ...]:
    """Accept a tuple, a mapping or a ``"x=8,q=13"`` string."""
    if isinstance(box, str):
        parsed = {}
        for part in box.split(","):
            part = part.strip()
            if not part:
                continue
            k, _, v = part.partition("=")
            parsed[k.strip()] = int(v)
        box = parsed
    if isinstance(box, Mapping):
        unknown = set(box) - set(vars)
        if unknown:
            raise BoxOverflow(f"box names {sorted(unknown)} not among variables {vars}")
        missing = [v for v in vars if v not in box]
        if missing:
            raise BoxOverflow(f"box is missing variables {missing} (variables: {vars})")
        return tuple(int(box[v]) for v in vars)
    box = tuple(int(b) for b in box)
    if len(box) != len(vars):
        raise BoxOverflow(f"box {box} does not match variables {vars}")
    return box


def _in(vars, box):
    return tuple(box[v] for v in vars)


def _b_cp_half(box, variant):
    return _ev(CP_HALF_CLASSICAL if variant == "corrected" else CP_HALF, ("x",), (box["x"],))


def _b_cpbu_z(box, variant):
    vars = ("x", "y", "z")
    return _ev(CPBU, vars, _in(vars, box))


def _b_cpbu_area(box, variant):
    vars = ("x", "y", "z", "t")
    b = _in(vars, box)
    one = TruncatedSeries.one(vars, b)
    X = TruncatedSeries.var(vars, b, "x")
    Y = TruncatedSeries.var(vars, b, "y")
    Z = TruncatedSeries.var(vars, b, "z")
    T = TruncatedSeries.var(vars, b, "t")
    total = TruncatedSeries.zero(vars, b)
    prod = one
    for j in range(box["x"]):
        # every term with index j carries x**(j+1)
        term = exact_div(Y * (X * T) ** (j + 1), (one - Y * T ** (j + 1) * Z) * prod)
        total = total + term
        prod = prod * (one - Y * T ** (j + 1) * Z) ** 2
    return total


def _cpu_env(vars, b, z0_series):
    return {"Z0": embed(z0_series, vars, b)}


def _b_cpu_z(box, variant):
    vars = ("x", "y", "z")
    b = _in(vars, box)
    return _ev(CPU, vars, b, **_cpu_env(vars, b, _z0(box)))


def _cpu_at(zval: TruncatedSeries, vars, b, z0s) -> TruncatedSeries:
    env = _cpu_env(vars, b, z0s)
    env["z"] = zval
    env["x"] = _x_from_s(vars, b)
    return _ev(CPU, vars, b, **env)


def _b_cp_xy(box, variant):
    vars = ("s", "y")
    sb = _s_box(box)
    b = _in(vars, sb)
    xs = _x_from_s(vars, b)
    z0s = _s_proxy(_z0, {"x": box["x"], "y": box["y"]}, vars, b)
    zp = embed(_zpm(1, sb), vars, b)
    zm = embed(_zpm(-1, sb), vars, b)
    env = {
        "x": xs,
        "CU1": _ev(CPU_AT1, vars, b, x=xs, Z0=z0s),
        "CUp": _cpu_at(zp, vars, b, z0s),
        "CUm": _cpu_at(zm, vars, b, z0s),
        "CBp": _ev(CPBU, vars, b, x=xs, z=zp),
        "CBm": _ev(CPBU, vars, b, x=xs, z=zm),
    }
    return _fold(_ev(CP_XY, vars, b, **env), ("x", "y"))


def _s_proxy(fn, xbox: dict, vars, b) -> TruncatedSeries:
    """Build ``fn`` (a series in x, ...) and re-express it in ``s`` (x = s**2)."""
    a = fn(xbox)
    a = substitute(a, "x", {"s": 2})
    return embed(a, vars, b)


def _b_f_u_z1(box, variant):
    vars = ("x", "y", "z")
    return _ev(F_U_Z1 if variant == "printed" else F_U_Z1_FIXED, vars, _in(vars, box))


def _simple(text, vars):
    def builder(box, variant):
        return _ev(text, vars, _in(vars, box))
    return builder


def _b_e_u_at1(box, variant):
    vars = ("x", "y", "q")
    b = _in(vars, box)
    z0 = _e_z0(box, printed=(variant == "printed"))
    return _ev(E_U_AT1, vars, b, Z0=z0)


def _e_u_in(vars, b, zval, xval, z0, variant) -> TruncatedSeries:
    env = {"Z0": embed(z0, vars, b) if z0.vars != vars else z0}
    if zval is not None:
        env["z"] = zval
    if xval is not None:
        env["x"] = xval
    if variant == "printed":
        return _ev(E_U_PRINTED, vars, b, **env)
    env["EU1"] = _ev(E_U_AT1, vars, b, **{k: v for k, v in env.items() if k != "z"})
    return _ev(E_U, vars, b, **env)


def _b_e_u(box, variant):
    vars = ("x", "y", "z", "q")
    b = _in(vars, box)
    z0 = _e_z0(box, printed=(variant == "printed"))
    return _e_u_in(vars, b, None, None, z0, variant)


def _b_d_full(box, variant):
    """Degree-two/three/four object rebuilt from ``e_full`` by exponent bookkeeping.

    A polyomino with ``v`` columns, ``h`` rows and ``d2`` convex corners has
    ``d4 = d2 - 4`` and ``d3 = 2(v + h) - 2 d2 + 4``.
    """
    e = _b_simple_e_full({"x": box["x"], "y": box["y"], "q": box["q"]}, variant)
    vars = ("x", "y", "q", "p", "t")
    coeffs = {}
    for (v, h, d2), c in e.coeffs.items():
        d3 = 2 * (v + h) - 2 * d2 + 4
        d4 = d2 - 4
        if d3 < 0 or d4 < 0:
            raise SeriesError(f"degree identity violated at x^{v} y^{h} q^{d2}")
        coeffs[(v, h, d2, d3, d4)] = c
    return TruncatedSeries(vars, _in(vars, box), coeffs)


_b_simple_e_full = _simple(E_FULL, ("x", "y", "q"))


def _b_e_semi(box, variant):
    vars = ("x", "q")
    b = _in(vars, box)
    return _ev(E_FULL, vars, b, y=TruncatedSeries.var(vars, b, "x"))


def _j_u_in(vars, b, env, variant) -> TruncatedSeries:
    return _ev(J_U_ROOT_RADICAND if variant == "corrected" else J_U, vars, b, **env)


def _b_j_u(box, variant):
    vars = ("x", "y", "z", "q")
    return _j_u_in(vars, _in(vars, box), {}, variant)


def _b_j_full(box, variant):
    vars = ("s", "y", "q")
    b = _in(vars, _s_box(box))
    xs = _x_from_s(vars, b)
    if variant == "corrected":
        return _fold(_j_at_one(vars, b, {"x": xs}), ("x", "y", "q"))
    zp = _ev(J_ZPM, vars, b, SGN=1, x=xs)
    zm = _ev(J_ZPM, vars, b, SGN=-1, x=xs)
    jb = {sg: _ev(J_BU, vars, b, x=xs, z=z) for sg, z in ((1, zp), (-1, zm))}
    ju_variant = "printed" if variant == "printed" else "corrected"
    ju = {sg: _j_u_in(vars, b, {"x": xs, "z": z}, ju_variant) for sg, z in ((1, zp), (-1, zm))}
    if variant == "printed":
        env = {"x": xs, "zp": zp, "zm": zm, "JUp": ju[1], "JUm": ju[-1], "JBp": jb[1], "JBm": jb[-1]}
        return _fold(_ev(J_FULL, vars, b, **env), ("x", "y", "q"))
    # Both kernel roots of the equation with case (8) weighted q^2 annihilate
    # the left side; eliminating the first-column derivative leaves J(1).
    ju1 = _ev(J_U_ROOT_RADICAND, vars, b, x=xs, z=1)
    side = {sg: _ev(J_ROOT_SIDE, vars, b, x=xs, z=z, JB=jb[sg], JU=ju[sg], JU1=ju1)
            for sg, z in ((1, zp), (-1, zm))}
    j1 = _ev("((1-zm)*Ap-(1-zp)*Am)/(q**2*x*(zp-zm))", vars, b,
             x=xs, zp=zp, zm=zm, Ap=side[1], Am=side[-1])
    return _fold(j1, ("x", "y", "q"))


def _j_at_one(vars, b, env) -> TruncatedSeries:
    """J(1) for the full class from its two kernel roots.

    ``env`` may bind ``x``, ``y``, ``q`` and ``s`` (with ``x = s**2``) to
    series, which lets callers specialize before any expansion.  A first
    column strictly inside a longer second column adds no outer site, so the
    kernel in ``w = 1-z`` is ``(1-q^2x)w^2 - x(1-2qw)``, whose roots
    ``w = s/(1+qs)`` and ``w = -s/(1-qs)`` are rational in ``s``.
    """
    ju1 = _ev(J_U_ROOT_RADICAND, vars, b, z=1, **env)
    side = {}
    for sg in (1, -1):
        w = _ev("SGN*s/(1+SGN*q*s)", vars, b, SGN=sg, **env)
        z = _ev("1-W", vars, b, W=w)
        jbz = _ev(J_BU, vars, b, z=z, **env)
        juz = _ev(J_U_ROOT_RADICAND, vars, b, z=z, **env)
        side[sg] = (w, _ev(J_ROOT_SIDE, vars, b, z=z, JB=jbz, JU=juz, JU1=ju1, **env))
    (wp, ap), (wm, am) = side[1], side[-1]
    return _ev("(wm*Ap-wp*Am)/(x*(wm-wp))", vars, b, wp=wp, wm=wm, Ap=ap, Am=am, **env)


def _b_j_semi(box, variant):
    vars = ("s", "q")
    b = (2 * box["x"] + 1, box["q"])
    x = _x_from_s(vars, b)
    return _fold(_j_at_one(vars, b, {"x": x, "y": x}), ("x", "q"))


def _b_j_outer_uni(box, variant):
    if variant == "printed":
        return _ev(J_OUTER_UNI, ("q",), (box["q"],))
    # o >= 2v and o >= 2h, so the semiperimeter is at most o
    m = box["q"]
    return substitute(build("j_semi", {"x": m, "q": m}), "x", 1, bound=DegreeBound(0, q=1))


def _b_j_dq_uni(box, variant):
    if variant == "printed":
        return _ev(J_DQ_UNI, ("x",), (box["x"],))
    # y := x and q := 1 + t before expanding; the t-linear part is the total.
    vars = ("s", "t")
    b = (2 * box["x"] + 1, 1)
    x = _x_from_s(vars, b)
    j = _j_at_one(vars, b, {"x": x, "y": x, "q": _ev("1+t", vars, b)})
    linear = TruncatedSeries(("s",), (j.box[0],), {(k,): c for (k, d), c in j.coeffs.items() if d == 1})
    return _fold(linear, ("x",))


def _entry(name, vars, description, builder, bounds=None, variants=("printed",)):
    return GfEntry(name, tuple(vars), description, builder, dict(bounds or {}), tuple(variants))


# Degree certificates.  Under x = columns, y = rows:
#  * first-column length c <= h - 1;
#  * cells t <= v*h is not linear, so area series are never evaluated at t = 1
#    here; interior vertices int <= (v-1)(h-1) likewise;
#  * d2 <= v + h + 2 (each column contributes at most two convex corners
#    beyond the first, rows likewise) and o <= 2(v + h).
_Z_BOUND = DegreeBound(-1, y=1)
_D2_BOUND = DegreeBound(2, x=1, y=1)
_O_BOUND = DegreeBound(0, x=2, y=2)

CATALOG: dict[str, GfEntry] = {
    e.name: e
    for e in [
        _entry("cp_halfperimeter", "x", "convex polyominoes by semiperimeter", _b_cp_half,
               variants=("corrected", "printed")),
        _entry("cpbu_z", "xyz", "both-sides-staircase class by columns, rows, first column",
               _b_cpbu_z, {"z": _Z_BOUND}),
        _entry("cpbu_area", "xyzt", "both-sides-staircase class with cells marked",
               _b_cpbu_area, {"z": _Z_BOUND}),
        _entry("cpu_z", "xyz", "top-staircase class by columns, rows, first column",
               _b_cpu_z, {"z": _Z_BOUND}),
        _entry("cp_xy", "xy", "convex polyominoes by columns and rows", _b_cp_xy),
        _entry("f_u_z1", "xyz", "top-staircase class at unit interior weight",
               _b_f_u_z1, {"z": _Z_BOUND}, ("corrected", "printed")),
        _entry("f_u_dq", "xy", "top-staircase class, total interior vertices",
               _simple(F_U_DQ, ("x", "y"))),
        _entry("f_at_11", "xy", "interior series at unit weight and z = 1",
               _simple(F_AT_11, ("x", "y"))),
        _entry("f_dz", "xy", "first-column derivative of the convex series at z = 1",
               _simple(F_DZ, ("x", "y"))),
        _entry("f_dq", "xy", "total interior vertices by columns and rows",
               _simple(F_DQ, ("x", "y"))),
        _entry("f_dq_uni", "x", "total interior vertices by semiperimeter",
               _simple(F_DQ_UNI, ("x",))),
        _entry("e_bu", "xyzq", "both-sides-staircase class by convex corners",
               _simple(E_BU, ("x", "y", "z", "q")), {"z": _Z_BOUND, "q": _D2_BOUND}),
        _entry("e_u", "xyzq", "top-staircase class by convex corners", _b_e_u,
               {"z": _Z_BOUND, "q": _D2_BOUND}, ("corrected", "printed")),
        _entry("e_u_at1", "xyq", "top-staircase class by convex corners at z = 1", _b_e_u_at1,
               {"q": _D2_BOUND}, ("corrected", "printed")),
        _entry("e_full", "xyq", "convex polyominoes by convex corners",
               _b_simple_e_full, {"q": _D2_BOUND}),
        _entry("e_semi", "xq", "convex polyominoes by semiperimeter and convex corners",
               _b_e_semi, {"q": DegreeBound(2, x=1)}),
        _entry("d_full", "xyqpt", "convex polyominoes by vertices of degree two, three, four",
               _b_d_full, {"q": _D2_BOUND, "t": DegreeBound(-2, x=1, y=1),
                           "p": DegreeBound(0, x=2, y=2)}),
        _entry("d_deg23", "q", "convex polyominoes by vertices of degree at most three",
               _simple(D_DEG23, ("q",))),
        _entry("e_dq_uni", "x", "total convex corners by semiperimeter",
               _simple(E_DQ_UNI, ("x",))),
        _entry("j_bu", "xyzq", "both-sides-staircase class by outer sites",
               _simple(J_BU, ("x", "y", "z", "q")), {"z": _Z_BOUND, "q": _O_BOUND}),
        _entry("j_u", "xyzq", "top-staircase class by outer sites", _b_j_u,
               {"z": _Z_BOUND, "q": _O_BOUND}, ("corrected", "printed")),
        _entry("j_full", "xyq", "convex polyominoes by outer sites", _b_j_full,
               {"x": DegreeBound(0, q=Fraction(1, 2)), "y": DegreeBound(0, q=Fraction(1, 2))},
               ("corrected", "printed_weights", "printed")),
        _entry("j_semi", "xq", "convex polyominoes by semiperimeter and outer sites",
               _b_j_semi, {"x": DegreeBound(0, q=1)}, ("corrected",)),
        _entry("j_outer_uni", "q", "convex polyominoes by outer sites alone",
               _b_j_outer_uni, variants=("corrected", "printed")),
        _entry("j_dq_uni", "x", "total outer sites by semiperimeter",
               _b_j_dq_uni, variants=("corrected", "printed")),
    ]
}


def catalog_names() -> list[str]:
    return sorted(CATALOG)


def build(name: str, box, variant: str | None = None, max_margin: int = 6) -> TruncatedSeries:
    """Expand catalog entry ``name`` exactly within ``box``.

    Divisions by monomials shrink boxes, so the builder works at a slightly
    larger box and retries with more room until the request is covered.
    """
    if name not in CATALOG:
        raise UnknownName(f"unknown generating function {name!r}; known: {', '.join(catalog_names())}")
    entry = CATALOG[name]
    variant = variant or entry.default_variant
    if variant not in entry.variants:
        raise UnknownName(f"{name} has no variant {variant!r}; available: {entry.variants}")
    target = normalize_box(entry.vars, box)
    margin = 0
    while True:
        work = {v: b + margin for v, b in zip(entry.vars, target)}
        try:
            res = entry.builder(work, variant)
        except BoxOverflow:
            res = None
        except SeriesError as exc:
            raise type(exc)(f"while building {name} at box {dict(zip(entry.vars, target))}: {exc}") from exc
        if res is not None and all(r >= t for r, t in zip(res.box, target)):
            return res.truncate(target)
        if margin >= max_margin:
            got = None if res is None else res.box
            raise BoxOverflow(f"{name}: could not reach box {target} (got {got})")
        margin = margin + 1 if margin < 2 else margin * 2


# -- specializations --------------------------------------------------------------------

def at_diagonal(a: TruncatedSeries) -> TruncatedSeries:
    """Set ``y := x`` so that ``x`` marks the semiperimeter."""
    return substitute(a, "y", "x")


def deg23_series(max_q: int, source: TruncatedSeries | None = None) -> TruncatedSeries:
    """Sum of ``q**(d2+d3)`` over convex polyominoes, from the convex-corner series.

    ``d2 + d3 = 2n - d2 + 4`` at semiperimeter ``n``; since ``d2 <= n + 2``
    every polyomino with ``d2 + d3 <= max_q`` has ``n <= max_q - 2``.
    """
    return _deg23(max_q, source, with_d4=False)


def deg23_d4_series(max_q: int, max_p: int, source: TruncatedSeries | None = None) -> TruncatedSeries:
    """Sum of ``q**(d2+d3) p**d4`` over convex polyominoes."""
    return _deg23(max_q, source, with_d4=True, max_p=max_p)


def _deg23(max_q, source, with_d4, max_p=0):
    n_max = max(max_q - 2, 1)
    if source is None:
        source = build("e_semi", {"x": n_max, "q": n_max + 2})
    diag = at_diagonal(source) if "y" in source.vars else source
    coeffs = {}
    for (n, d2), c in diag.coeffs.items():
        if n > n_max:
            continue
        e = 2 * n - d2 + 4
        if e > max_q:
            continue
        key = (e, d2 - 4) if with_d4 else (e,)
        if with_d4 and d2 - 4 > max_p:
            continue
        coeffs[key] = coeffs.get(key, 0) + c
    if diag.box[0] < n_max or diag.box[1] < n_max + 2:
        raise BoxOverflow(f"source box {diag.box} too small for degree bound {max_q}")
    vars = ("q", "p") if with_d4 else ("q",)
    box = (max_q, max_p) if with_d4 else (max_q,)
    return TruncatedSeries(vars, box, coeffs)


def outer_series_from_j(j: TruncatedSeries, max_q: int) -> TruncatedSeries:
    """Set ``x = y = 1`` in a series in (x, y, q); needs ``x, y`` boxes >= max_q // 2."""
    a = j.truncate({"q": max_q})
    a = substitute(a, "x", 1, bound=DegreeBound(0, q=Fraction(1, 2)))
    return substitute(a, "y", 1, bound=DegreeBound(0, q=Fraction(1, 2)))


# -- kernel residuals -----------------------------------------------------------------------

def _sub_z1(a: TruncatedSeries) -> TruncatedSeries:
    """Set ``z := 1`` using the certificate ``deg_z <= deg_y - 1``."""
    return substitute(a, "z", 1, bound=_Z_BOUND)


def _drop_z(a: TruncatedSeries, vars, b) -> TruncatedSeries:
    return embed(a, vars, b)


def _res_eqCPu2(box, perturb):
    vars = ("x", "y", "z")
    b = _in(vars, box)
    wide = dict(box, z=max(box["z"], box["y"]))
    cu = build("cpu_z", wide)
    cu1 = _drop_z(_sub_z1(cu), vars, b)
    cu = cu.truncate(b) + perturb(vars, b)
    cbu = build("cpbu_z", box)
    return _ev(
        "((1-z)*(1-y*z)+x*z)*CU - x*y*(1-z) - x*y*z*(1-z)/(1-y*z)*CBU - x*CU1",
        vars, b, CU=cu, CU1=cu1, CBU=cbu,
    )


def _res_eqaF22_q1(box, perturb, variant="corrected"):
    vars = ("x", "y", "z")
    b = _in(vars, box)
    wide = dict(box, z=max(box["z"], box["y"]))
    fu = build("f_u_z1", wide, variant=variant)
    fu1 = _drop_z(_sub_z1(fu), vars, b)
    fu = fu.truncate(b) + perturb(vars, b)
    fbu = build("cpbu_z", box)
    return _ev(
        "((1-z)*(1-y*z)+x*z)*FU - x*y*(1-z) - x*y*z*(1-z)/(1-y*z)*FBU - x*FU1",
        vars, b, FU=fu, FU1=fu1, FBU=fbu,
    )


def _res_eqbD5(box, perturb, variant="corrected"):
    vars = ("x", "y", "z", "q")
    b = _in(vars, box)
    eu = build("e_u", box, variant=variant) + perturb(vars, b)
    eu1 = embed(build("e_u_at1", {"x": box["x"], "y": box["y"], "q": box["q"]}, variant=variant), vars, b)
    sign = "+" if variant == "corrected" else "-"
    return _ev(
        f"((1-y*z)*(1-z){sign}x*(z+q-1)*(1+(q-1)*y*z))*EU - q*x*(1+(q-1)*y*z)*EU1"
        " - q**4*x*y*(1-x-y*z-(q-1)*x*y*z)*(1-y*z)*(1-z)/((1-y*z)**2-x*(1+(q-1)*y*z)**2)",
        vars, b, EU=eu, EU1=eu1,
    )


def _res_eqCu1(box, perturb, variant="corrected"):
    vars = ("x", "y", "z", "q")
    b = _in(vars, box)
    wide = dict(box, z=max(box["z"], box["y"]))
    ju = build("j_u", wide, variant=variant)
    ju1 = embed(_sub_z1(ju), vars, b)
    ju = ju.truncate(b) + perturb(vars, b)
    jbu = build("j_bu", box)
    # Multiplied through by (1-z)(1-q^2yz)^2 before grouping the unknown on
    # one side; the grouped kernel does not follow from the sum of cases.
    return _ev(
        "(1-z)*(1-q**2*y*z)**2*JU - q**4*x*y*(1-z)*(1-q**2*y*z) - q**4*x*y**2*z**2*(1-z)*JBU"
        " - q**3*x*y*z*(1-z)*(1-q**2*y*z)*(JBU+JU) - q**2*x*(1-z)*(1-q**2*y*z)**2*JU"
        " + q*x*(1+q*(1-q)*y*z)*(1-q**2*y*z)*(JU-JU1)",
        vars, b, JU=ju, JU1=ju1, JBU=jbu,
    )


def _res_eqacp1(box, perturb):
    """Perimeter equation for the full class at the kernel root ``z = 1/(1+s)``.

    Multiplying through by ``(1-z)**2 (1-yz)**2`` the kernel term vanishes at
    the root; what remains must be zero.  Every ingredient is rational in
    ``s``, and ``s -> -s`` maps this root to the other one, so the residual
    at ``z = 1/(1-s)`` is the mirror image of the one returned.
    """
    vars = ("s", "y")
    sb = {"s": 2 * box["x"] + 1, "y": box["y"]}
    b = _in(vars, sb)
    xs = _x_from_s(vars, b)
    xybox = {"x": box["x"], "y": box["y"]}
    c1 = _s_proxy(lambda bb: build("cp_xy", bb), xybox, vars, b) + perturb(vars, b)
    dc1 = _s_proxy(lambda bb: build("f_dz", bb), xybox, vars, b)
    z0s = _s_proxy(_z0, xybox, vars, b)
    z = embed(_zpm(1, sb), vars, b)
    return _ev(
        "x*y*(1-y*z)*(1-z)**2 + x*(1-2*z)*(1-y*z)**2*C1 + x*(1-z)*(1-y*z)**2*DC1"
        " + x*y**2*z**2*(1-z)**2*CBU - 2*x*y*z*(1-y*z)*(1-z)*(z*CU-CU1)",
        vars, b, x=xs, z=z, C1=c1, DC1=dc1,
        CU=_cpu_at(z, vars, b, z0s),
        CU1=_ev(CPU_AT1, vars, b, x=xs, Z0=z0s),
        CBU=_ev(CPBU, vars, b, x=xs, z=z),
    )


def _res_eqbD8(box, perturb, variant="corrected"):
    """Convex-corner equation for the full class at both kernel roots.

    At ``z = 1 -+ q s / (1 +- s)`` the kernel vanishes; the unknown
    first-column derivative is eliminated between the two roots, leaving a
    relation that the closed forms must satisfy exactly.
    """
    vars = ("s", "y", "q")
    sb = {"s": 2 * box["x"] + 1, "y": box["y"], "q": box["q"]}
    b = _in(vars, sb)
    xs = _x_from_s(vars, b)
    xyq = {"x": box["x"], "y": box["y"], "q": box["q"]}
    e1 = _s_proxy(lambda bb: build("e_full", bb), xyq, vars, b) + perturb(vars, b)
    z0 = _s_proxy(lambda bb: _e_z0(bb, printed=(variant == "printed")), xyq, vars, b)
    parts = []
    for sign in (1, -1):
        z = _ev("1-SGN*q*s/(1+SGN*s)", vars, b, SGN=sign)
        eu = _e_u_in(vars, b, z, xs, z0, variant)
        eu1 = _ev(E_U_AT1, vars, b, x=xs, Z0=z0)
        ebu = _ev(E_BU, vars, b, x=xs, z=z)
        # R(z) = A(z) + B(z) * dE(1) after multiplying by (1-z)**2 (1-yz)**2
        a = _ev(
            "q**4*x*y*(1-y*z)*(1-z)**2 + q**2*x*y**2*z**2*(1-z)**2*EBU"
            " - 2*q*x*y*z*(q-1+z)*(1-y*z)*(1-z)*EU + 2*q**2*x*y*z*(1-z)*(1-y*z)*EU1"
            " - q*x*(q-2+2*z)*(1-y*z)**2*E1",
            vars, b, x=xs, z=z, EBU=ebu, EU=eu, EU1=eu1, E1=e1,
        )
        bcoef = _ev("q**2*x*(1-z)*(1-y*z)**2", vars, b, x=xs, z=z)
        parts.append((a, bcoef))
    (ap, bp), (am, bm) = parts
    return ap * bm - am * bp


EQUATIONS = {
    "eqCPu2": (("x", "y", "z"), _res_eqCPu2),
    "eqacp1": (("x", "y"), _res_eqacp1),
    "eqaF22_q1": (("x", "y", "z"), _res_eqaF22_q1),
    "eqbD5": (("x", "y", "z", "q"), _res_eqbD5),
    "eqbD8": (("x", "y", "q"), _res_eqbD8),
    "eqCu1": (("x", "y", "z", "q"), _res_eqCu1),
}


def _no_perturbation(vars, b):
    return TruncatedSeries.zero(vars, b)


def _x_perturbation(vars, b):
    if "x" in vars:
        return TruncatedSeries.var(vars, b, "x")
    return TruncatedSeries.monomial(vars, b, {"s": 2})


def kernel_residual(equation: str, box, perturb: bool = False, variant: str | None = None) -> TruncatedSeries:
    """Left minus right side of a functional equation with closed forms plugged in.

    With ``perturb=True`` the unknown series is shifted by ``x`` first, which
    must make the residual nonzero.
    """
    if equation not in EQUATIONS:
        raise UnknownName(f"unknown equation {equation!r}; known: {sorted(EQUATIONS)}")
    vars, fn = EQUATIONS[equation]
    b = dict(zip(vars, normalize_box(vars, box)))
    p = _x_perturbation if perturb else _no_perturbation
    try:
        if variant is not None:
            return fn(b, p, variant)
        return fn(b, p)
    except ConvexPolyError as exc:
        raise type(exc)(f"residual {equation} at box {b}: {exc}") from exc
