"""Bundled algebras and named states.

Small tables are written inline; the long displays (the subregular and
principal g2 tables, the Lambda/Omega pole fields and the decoupling
relations) live as JSON fixtures under ``data/`` with per-term tags and a
checksum, see :mod:`vacalc.presets.fixtures`.
"""

from __future__ import annotations

import re
from functools import lru_cache

from ..coeff import ETA, SQRT3, mpq, parameter, to_scalar
from ..engine import Algebra
from ..terms import Element
from . import fixtures

__all__ = [
    "build_virasoro", "build_vinfty", "build_vinfty_cube", "build_virasoro_cube",
    "build_ising_cube", "build_g2_subregular", "build_g2_principal",
    "gen_W", "gen_C", "gen_u", "PRESETS", "get_preset", "UnknownPreset",
    "ExcludedLevel", "central_charge_sub", "central_charge_prin",
    "principal_poly", "COLLAPSING_LEVELS", "even_spin_w4_product",
    "z3_rotate", "z2_swap", "collapse_factor", "algebra_from_json", "algebra_to_json",
]


class UnknownPreset(KeyError):
    pass


class ExcludedLevel(ValueError):
    pass


def _virasoro_poles(x: str, w: int, cterm: str | None = None):
    """Poles of L(z)X(w) for X primary of weight w (plus c/2 for X = L)."""
    poles = [f"d({x})", f"{w}*{x}"]
    if cterm is not None:
        poles += ["0", cterm]
    return poles


# ----------------------------------------------------------------------
# Virasoro and the generalized free field limit
# ----------------------------------------------------------------------

def build_virasoro(cval=None, *, memo=True) -> Algebra:
    A = Algebra("virasoro", [("L", 2)], {("L", "L"): ["d(L)", "2*L", "0", "c/2"]},
                param="c", memo=memo, states={
                    # weight-4 singular vector at c = -22/5
                    "vsing4": "NO(L, L) - 3/5*NO(d^2(L))",
                    # weight-6 singular vector at c = 1/2
                    "v1": "NO(L, L, L) + 93/64*NO(d(L), d(L)) - 33/16*NO(d^2(L), L) - 9/128*d^4(L)",
                })
    return A.specialize(cval, name="virasoro") if cval is not None else A


def build_vinfty(*, memo=True) -> Algebra:
    return Algebra("vinfty", [("T", 2)], {("T", "T"): ["0", "0", "0", "1"]}, memo=memo)


def _wc_resolver(A, name):
    m = re.fullmatch(r"W_(\d+)_(\d+)", name)
    if m:
        return gen_W(A, int(m[1]), int(m[2]))
    m = re.fullmatch(r"C_(\d+)_(\d+)_(\d+)", name)
    if m:
        return gen_C(A, int(m[1]), int(m[2]), int(m[3]))
    m = re.fullmatch(r"R2_(\d+)_(\d+)_(\d+)_(\d+)_(\d+)", name)
    if m:
        from ..reduction import build_R2
        return build_R2(tuple(int(x) for x in m.groups()), A)
    return None


def build_vinfty_cube(*, memo=True, overrides=None) -> Algebra:
    """T0, T1, T2 with T0 T0 ~ 1/(z-w)^4 and T1 T2 ~ 1/(z-w)^4 only."""
    states = fixtures.load_states("vinfty3")
    states.update(overrides or {})
    return Algebra(
        "vinfty3", [("T0", 2), ("T1", 2), ("T2", 2)],
        {("T0", "T0"): ["0", "0", "0", "1"],
         ("T1", "T2"): ["0", "0", "0", "1"],
         ("T0", "T1"): [], ("T0", "T2"): [], ("T1", "T1"): [], ("T2", "T2"): []},
        states=states, resolver=_wc_resolver, memo=memo)


def gen_W(A: Algebra, m: int, n: int) -> Element:
    """:(d^m T1)(d^n T2): + :(d^n T1)(d^m T2):

    The vinfty3 preset also resolves the state names ``W_m_n``, ``C_l_m_n``
    and ``R2_m1_m2_m3_m4_m5`` on demand.
    """
    t1, t2 = A.gen("T1"), A.gen("T2")
    d = A.derivative
    return A.no(d(t1, m), d(t2, n)) + A.no(d(t1, n), d(t2, m))


def gen_C(A: Algebra, l: int, m: int, n: int) -> Element:
    """:(d^l T1)(d^m T1)(d^n T1): + the same word in T2."""
    d = A.derivative
    out = Element()
    for g in ("T1", "T2"):
        t = A.gen(g)
        out = out + A.nop(d(t, l), d(t, m), d(t, n))
    return out


def gen_u(A: Algebra, mlist, copies=("L1", "L2", "L3")) -> Element:
    """sum_i L_i(-2-m_1)...L_i(-2-m_k) 1, i.e. sum_i :(d^m1 L_i/m1!)...:."""
    from math import factorial
    out = Element()
    for g in copies:
        x = A.gen(g) if A.gen_index(g) is not None else A.state(g)
        facs = [A.derivative(x, m) * mpq(1, factorial(m)) for m in mlist]
        out = out + A.nop(*facs)
    return out


# ----------------------------------------------------------------------
# three commuting Virasoro copies
# ----------------------------------------------------------------------

def build_virasoro_cube(cval=None, *, memo=True) -> Algebra:
    """L1, L2, L3: three mutually commuting Virasoro fields of charge c."""
    opes = {}
    names = ("L1", "L2", "L3")
    for a in names:
        for b in names:
            opes[(a, b)] = _virasoro_poles(a, 2, "c/2") if a == b else []
    A = Algebra("virasoro3", [(n, 2) for n in names], opes, param="c", memo=memo,
                states={"L": "L1 + L2 + L3"})
    return A.specialize(cval, name="virasoro3") if cval is not None else A


# coefficient vectors of L, U1, U2 in terms of L1, L2, L3 (before 1/sqrt3)
_Z3_ROWS = {"L": (1, 1, 1), "U1": (1, ETA, ETA ** 2), "U2": (1, ETA ** 2, ETA)}
_Z3_NAMES = ("L", "U1", "U2")


def _z3_table():
    """OPE table in the basis L, U1, U2 derived from three commuting copies.

    For X = sum x_i L_i and Y = sum y_i L_i one has X_(3)Y = (c/2) sum x_i y_i
    and X_(1)Y = 2 sum x_i y_i L_i; the products are rewritten back in the
    L, U1, U2 basis.
    """
    inv = 1 / SQRT3
    rows = {k: [to_scalar(v) * inv for v in r] for k, r in _Z3_ROWS.items()}
    # L_i = (L + conj-row_i . U) / sqrt3 ; express sum_i w_i L_i in the new basis
    back = [[to_scalar(1) * inv, to_scalar(1) * inv, to_scalar(1) * inv],
            [inv, ETA ** 2 * inv, ETA * inv],
            [inv, ETA * inv, ETA ** 2 * inv]]
    opes = {}
    for a in _Z3_NAMES:
        for b in _Z3_NAMES:
            w = [rows[a][i] * rows[b][i] for i in range(3)]
            central = sum(w, to_scalar(0))
            # sum_i w_i L_i = sum_i w_i * back[i] . (L, U1, U2)
            coeffs = [sum((w[i] * back[i][j] for i in range(3)), to_scalar(0)) for j in range(3)]
            lin = " + ".join(f"({_sc(c)})*{n}" for c, n in zip(coeffs, _Z3_NAMES) if c)
            if not lin:
                lin = "0"
            poles = [f"d({lin})", f"2*({lin})", "0", f"({_sc(central)})*c/2"]
            opes[(a, b)] = poles
    return opes


def _sc(x):
    from ..coeff import format_scalar
    return format_scalar(x)


_ISING_STATES = {
    # the weight-6 singular vector of each copy at c = 1/2
    "v1": "NO(L1, L1, L1) + 93/64*NO(d(L1), d(L1)) - 33/16*NO(d^2(L1), L1) - 9/128*d^4(L1)",
    "v2": "NO(L2, L2, L2) + 93/64*NO(d(L2), d(L2)) - 33/16*NO(d^2(L2), L2) - 9/128*d^4(L2)",
    "v3": "NO(L3, L3, L3) + 93/64*NO(d(L3), d(L3)) - 33/16*NO(d^2(L3), L3) - 9/128*d^4(L3)",
    "L1": "(L + U1 + U2)/sqrt3",
    "L2": "(L + eta^2*U1 + eta*U2)/sqrt3",
    "L3": "(L + eta*U1 + eta^2*U2)/sqrt3",
    "Ltot": "sqrt3*L",
    "W4hat": "3*NO(U1, U2) - 44/59*NO(Ltot, Ltot) - 9/118*d^2(Ltot)",
    # :U1'U2': for the unnormalized U_i' = sqrt3 U_i
    "W4t": "3*NO(U1, U2)",
}


def build_ising_cube(cval=mpq(1, 2), *, memo=True, overrides=None) -> Algebra:
    """Three commuting Virasoro copies in the basis diagonalizing the 3-cycle.

    ``L = (L1+L2+L3)/sqrt3``, ``U1 = (L1+eta L2+eta^2 L3)/sqrt3`` and
    ``U2 = (L1+eta^2 L2+eta L3)/sqrt3``.  The total conformal vector is
    ``Ltot = sqrt3 L``.  Pass ``cval=None`` for symbolic c.
    """
    states = dict(_ISING_STATES)
    states.update(fixtures.load_states("ising"))
    states.update(overrides or {})
    A = Algebra("ising3", [(n, 2) for n in _Z3_NAMES], _z3_table(), param="c",
                states=states, resolver=_ising_resolver, memo=memo)
    return A.specialize(cval, name="ising3") if cval is not None else A


def _ising_resolver(A, name):
    m = re.fullmatch(r"W(\d+)", name)
    if m and int(m[1]) >= 4:
        j = int(m[1]) - 4
        u1, u2 = A.gen("U1"), A.gen("U2")
        return A.no(A.derivative(u1, j), u2) + A.no(A.derivative(u2, j), u1) * (-1) ** j
    m = re.fullmatch(r"C([pm])(\d+)", name)
    if m and int(m[2]) >= 6:
        j = int(m[2]) - 6
        u1, u2 = A.gen("U1"), A.gen("U2")
        sgn = 1 if m[1] == "p" else -1
        return A.nop(A.derivative(u1, j), u1, u1) + A.nop(A.derivative(u2, j), u2, u2) * sgn
    return None


def even_spin_w4_product(lam=None, *, verbatim=False):
    """Coefficients of the universal even-spin W4_(3)W4 at c = 3/2.

    Returns ``(s_W, s_LL, s_dd)`` such that the product equals
    ``s_W*lam*W + s_LL*X*:LL: + s_dd*X*d^2 L`` with ``X = -2303/4 lam^2 - 1``.
    With ``lam`` given, the three actual coefficients are returned instead.
    ``verbatim=True`` keeps an extra factor 2 on the last term, which makes
    the matching inconsistent.
    """
    sW, sLL, sdd = mpq(816), mpq(-1088, 21), mpq(680, 147) * (2 if verbatim else 1)
    if lam is None:
        return sW, sLL, sdd
    lam = to_scalar(lam)
    X = -mpq(2303, 4) * lam * lam - 1
    return sW * lam, sLL * X, sdd * X


def z3_rotate(A: Algebra, x: Element) -> Element:
    """The 3-cycle (1 2 3): L -> L, U1 -> eta U1, U2 -> eta^2 U2."""
    scale = {A.gen_index("L"): 1, A.gen_index("U1"): ETA, A.gen_index("U2"): ETA ** 2}
    out = {}
    for m, c in x.items():
        s = to_scalar(1)
        for g, _ in m:
            s = s * scale[g]
        out[m] = c * s
    return Element(out)


def z2_swap(A: Algebra, x: Element) -> Element:
    """The transposition fixing copy 1: U1 <-> U2 (relabel, then reorder)."""
    i1, i2 = A.gen_index("U1"), A.gen_index("U2")
    perm = {i1: i2, i2: i1}
    raw = {}
    for m, c in x.items():
        mm = tuple((perm.get(g, g), d) for g, d in m)
        raw[mm] = raw.get(mm, 0) + c
    return A.canonicalize(Element(raw))


# ----------------------------------------------------------------------
# g2 W-algebras
# ----------------------------------------------------------------------

def central_charge_sub(k=None):
    k = parameter("k") if k is None else to_scalar(k)
    return -4 * (k + 2) * (6 * k + 17) / (k + 4)


def central_charge_prin(k=None):
    k = parameter("k") if k is None else to_scalar(k)
    return -2 * (12 * k + 41) * (7 * k + 24) / (k + 4)


def build_g2_subregular(kval=None, *, memo=True, verbatim=False) -> Algebra:
    """L, E, F (weight 2) and G (weight 3).

    The E/F/G table is read from the fixture; ``verbatim=True`` skips the
    recorded corrections so the table is exactly as transcribed.
    """
    if kval is not None and to_scalar(kval) == -4:
        raise ExcludedLevel("k = -4")
    data = fixtures.load_table("g2_subregular", apply_errata=not verbatim)
    opes = {("L", "L"): ["d(L)", "2*L", "0", "c/2"],
            ("L", "E"): _virasoro_poles("E", 2), ("L", "F"): _virasoro_poles("F", 2),
            ("L", "G"): _virasoro_poles("G", 3)}
    opes.update(data["opes"])
    scal = {"c": central_charge_sub()}
    A = Algebra("g2sub" + ("-verbatim" if verbatim else ""),
                [("L", 2), ("E", 2), ("F", 2), ("G", 3)], opes,
                param="k", scalars=scal, states=data.get("states", {}), memo=memo)
    return A.specialize(kval, name=A.name) if kval is not None else A


def principal_poly(name: str, k=None, *, verbatim=False):
    """p0 ... p7 and the two excluded quadratics as functions of k.

    p3, p5 and p7 (the coefficients of W-dependent terms) carry no q1 q2
    factor; with it the W W W Jacobi identity fails.  ``verbatim=True``
    restores the factor.
    """
    k = parameter("k") if k is None else to_scalar(k)
    q1 = 336 * k ** 2 + 2301 * k + 3940
    q2 = 588 * k ** 2 + 3991 * k + 6752
    r = 3 * k ** 2 + 24 * k + 47
    core = (2 * k + 5) * (2 * k + 7) * (3 * k + 10) * (9 * k + 34) * (11 * k + 40) * (12 * k + 37)
    mid = (7 * k + 22) * (8 * k + 27) * (15 * k + 52) * (18 * k + 65)
    table = {
        "q1": q1, "q2": q2,
        "p0": (k + 4) * core * mid * (7 * k + 23) * (15 * k + 53),
        "p1": (k + 4) ** 2 * core * mid * q1 * q2,
        "p2": (k + 4) ** 2 * core * mid,
        "p3": (k + 4) * (2 * k + 7) * (3 * k + 10) * (7 * k + 20) * (12 * k + 35)
              * (13 * k + 48) * (24 * k + 89) * r,
        "p4": (k + 4) ** 2 * core,
        "p5": (k + 4) * (2 * k + 7) * (3 * k + 10) * (7 * k + 20) * (24 * k + 89) * r,
        "p6": (k + 4) ** 2 * (2 * k + 5) * (2 * k + 7) * (3 * k + 10) * (9 * k + 34),
        "p7": (k + 4) * r,
    }
    if verbatim and name in ("p3", "p5", "p7"):
        return table[name] * q1 * q2
    return table[name]


COLLAPSING_LEVELS = [mpq(-34, 9), mpq(-7, 2), mpq(-10, 3), mpq(-5, 2), mpq(-22, 7),
                     mpq(-65, 18), mpq(-40, 11), mpq(-37, 12), mpq(-27, 8),
                     mpq(-52, 15), mpq(-53, 15), mpq(-23, 7)]


def collapse_factor(k=None):
    """p0 (7k+24)(12k+41) q1 q2: the coefficient whose zeros allow collapse."""
    kk = parameter("k") if k is None else to_scalar(k)
    return (principal_poly("p0", k) * (7 * kk + 24) * (12 * kk + 41)
            * principal_poly("q1", k) * principal_poly("q2", k))


def build_g2_principal(kval=None, *, memo=True, verbatim=False, overrides=None) -> Algebra:
    """L (weight 2) and the primary W (weight 6), W W poles from the fixture.

    ``verbatim=True`` uses the uncorrected displays and coefficient polynomials.
    ``overrides`` replaces named fixture states (the pole fields among them).
    """
    if kval is not None:
        v = to_scalar(kval)
        if v == -4 or principal_poly("q1", v) == 0 or principal_poly("q2", v) == 0:
            raise ExcludedLevel(f"k = {v}")
    data = fixtures.load_table("g2_principal", apply_errata=not verbatim)
    scal = {"c": central_charge_prin()}
    for i in range(8):
        scal[f"p{i}"] = principal_poly(f"p{i}", verbatim=verbatim)
    scal["q1"], scal["q2"] = principal_poly("q1"), principal_poly("q2")
    opes = {("L", "L"): ["d(L)", "2*L", "0", "c/2"],
            ("L", "W"): _virasoro_poles("W", 6)}
    opes.update(data["opes"])
    name = "g2prin" + ("-verbatim" if verbatim else "")
    states = dict(data.get("states", {}))
    states.update(overrides or {})
    A = Algebra(name, [("L", 2), ("W", 6)], opes, param="k", scalars=scal,
                states=states, memo=memo)
    return A.specialize(kval, name=name) if kval is not None else A


# ----------------------------------------------------------------------
# catalog and JSON schema
# ----------------------------------------------------------------------

PRESETS = {
    "virasoro": build_virasoro,
    "vinfty": lambda v=None, **kw: build_vinfty(**kw),
    "vinfty3": lambda v=None, **kw: build_vinfty_cube(**kw),
    "virasoro3": build_virasoro_cube,
    "ising3": lambda v=None, **kw: build_ising_cube(mpq(1, 2) if v is None else v, **kw),
    "g2sub": build_g2_subregular,
    "g2prin": build_g2_principal,
}


# fixture whose displays become named states of the preset
PRESET_FIXTURE = {"vinfty3": "vinfty3", "ising3": "ising", "g2prin": "g2_principal"}


@lru_cache(maxsize=None)
def _cached(name, value):
    return PRESETS[name](value)


def get_preset(name: str, value=None, *, fresh=False, overrides=None) -> Algebra:
    """Look up a preset, optionally specialized.  Instances are shared unless ``fresh``.

    ``overrides`` (``{state: source}``) builds a private instance with some
    fixture states replaced.
    """
    if name not in PRESETS:
        raise UnknownPreset(name)
    v = None if value is None else to_scalar(value)
    if overrides:
        if name not in PRESET_FIXTURE:
            raise ValueError(f"preset {name} has no fixture states to override")
        return PRESETS[name](v, overrides=overrides)
    if fresh:
        return PRESETS[name](v)
    return _cached(name, v)


def algebra_to_json(A: Algebra) -> dict:
    opes = []
    for i, j in A.table_pairs():
        poles = [A.format(Element._wrap(p)) for p in A.poles(i, j)]
        opes.append({"a": A.names[i], "b": A.names[j], "poles": poles})
    states = {}
    for name in A.state_names():
        states[name] = A.format(A.state(name))
    return {"name": A.name, "parameter": A.param,
            "generators": [{"name": g.name, "weight": g.weight} for g in A.generators],
            "opes": opes, "states": states}


def algebra_from_json(data: dict, *, memo=True) -> Algebra:
    gens = [(g["name"], int(g["weight"])) for g in data["generators"]]
    opes = {(o["a"], o["b"]): list(o["poles"]) for o in data["opes"]}
    return Algebra(data.get("name", "custom"), gens, opes, param=data.get("parameter"),
                   states=data.get("states", {}), memo=memo)
