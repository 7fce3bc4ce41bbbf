"""Exact linear algebra on states: spanning sets, decoupling relations,
the R1/R2 relation family, ideal membership and primary corrections.

Linear solves run column by column: each spanning element is reduced
against the echelon basis built so far, pivoting on its first nonzero
monomial in a fixed order.  Dependent columns get coefficient 0, so the
output is deterministic for a given spanning-set order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from math import comb

from .coeff import format_scalar, mpq, to_scalar
from .engine import Algebra, virasoro_mode
from .terms import MIXED, Element, factor_key

__all__ = [
    "SpanningSet", "Relation", "NotInSpan", "NotCorrectable", "NoSolution",
    "spanning_set", "express", "decouple", "solve", "determinant",
    "build_R1", "build_R2", "R2_TUPLES_C16", "cubic_coordinates", "solve_cubic",
    "ideal_membership", "primary_correction", "match_coupling",
]

_ZERO = mpq(0)


class NotInSpan(ValueError):
    """Raised by :func:`express`; ``residual`` is what is left after elimination."""

    def __init__(self, residual: Element, text: str = ""):
        super().__init__(text or "target is not in the span")
        self.residual = residual


class NotCorrectable(ValueError):
    pass


class NoSolution(ValueError):
    pass


# ----------------------------------------------------------------------
# spanning sets
# ----------------------------------------------------------------------

@dataclass
class SpanningSet:
    """All normally ordered products of atom derivatives at one weight.

    ``elements[i]`` is the canonical state of the word ``words[i]``, a tuple
    of ``(atom index, derivative order)``; ``labels[i]`` renders it in the
    element grammar using ``names``.
    """

    weight: int
    atoms: list
    names: list
    words: list = field(default_factory=list)
    elements: list = field(default_factory=list)

    @property
    def labels(self):
        return [self.label(w) for w in self.words]

    def label(self, word) -> str:
        fs = [self.names[i] if d == 0 else f"d^{d}({self.names[i]})" for i, d in word]
        return "NO(" + ", ".join(fs) + ")"

    def __len__(self):
        return len(self.words)


def _atom_weight(A: Algebra, x: Element) -> int:
    w = A.weight(x)
    if w is None or w is MIXED:
        raise ValueError("spanning-set atoms must be nonzero and homogeneous")
    return w


def spanning_set(A: Algebra, gens, w: int, maxdeg: int, names=None, maxder=None) -> SpanningSet:
    """Every ``:(d^j1 g1)...(d^jr gr):`` of weight ``w`` with ``r <= maxdeg``.

    ``gens`` is a list of homogeneous Elements (or state names).  Words are
    multisets ordered by atom index then derivative (descending) and listed
    longest first, then lexicographically.  ``maxder`` optionally caps the
    derivative order per atom.
    """
    elems, labels = [], []
    for i, g in enumerate(gens):
        if isinstance(g, str):
            labels.append(g)
            g = A.state(g) if A.gen_index(g) is None else A.gen(g)
        else:
            labels.append(names[i] if names else f"x{i}")
        elems.append(g)
    ws = [_atom_weight(A, g) for g in elems]
    letters = []
    for i, wa in enumerate(ws):
        top = w - wa
        if maxder is not None:
            top = min(top, maxder[i] if isinstance(maxder, (list, tuple)) else maxder)
        for d in range(top, -1, -1):
            letters.append((i, d))
    letters.sort(key=lambda f: (f[0], -f[1]))
    words = []
    for r in range(1, maxdeg + 1):
        for word in combinations_with_replacement(letters, r):
            if sum(ws[i] + d for i, d in word) == w:
                words.append(word)
    words.sort(key=lambda wd: (-len(wd), [(i, -d) for i, d in wd]))
    S = SpanningSet(w, list(zip(elems, [w - x for x in ws])), labels)
    cache = {}
    for word in words:
        facs = [_der(A, elems[i], d, cache, i) for i, d in word]
        S.words.append(word)
        S.elements.append(A.nop(*facs))
    return S


def _der(A, x, d, cache, key):
    k = (key, d)
    if k not in cache:
        cache[k] = A.derivative(x, d) if d else x
    return cache[k]


# ----------------------------------------------------------------------
# exact elimination
# ----------------------------------------------------------------------

def _row_key(weights):
    def key(m):
        return (-len(m), tuple(factor_key(f) for f in m))
    return key


class _Echelon:
    """Incremental column echelon basis with combination tracking."""

    def __init__(self, key):
        self.key = key
        self.basis = []  # (pivot monomial, vector dict, combination dict)

    def reduce(self, vec: dict, combo: dict):
        v = dict(vec)
        for piv, b, bc in self.basis:
            c = v.get(piv)
            if not c:
                continue
            f = c / b[piv]
            for m, s in b.items():
                t = v.get(m, _ZERO) - f * s
                if t:
                    v[m] = t
                else:
                    v.pop(m, None)
            for j, s in bc.items():
                t = combo.get(j, _ZERO) - f * s
                if t:
                    combo[j] = t
                else:
                    combo.pop(j, None)
        return v, combo

    def add(self, vec: dict, index: int) -> bool:
        v, combo = self.reduce(vec, {index: mpq(1)})
        if not v:
            return False
        piv = min(v, key=self.key)
        self.basis.append((piv, v, combo))
        return True

    @property
    def rank(self):
        return len(self.basis)


def solve(columns, target: Element, key=None):
    """Coefficients ``x`` with ``sum x_i columns[i] == target``.

    Returns ``(coeffs, residual)``; the residual is zero on success.
    """
    key = key or _row_key(None)
    E = _Echelon(key)
    for i, col in enumerate(columns):
        E.add(col.terms, i)
    v, combo = E.reduce(target.terms, {})
    coeffs = [_ZERO] * len(columns)
    for j, s in combo.items():
        coeffs[j] = -s
    return coeffs, Element(v)


def express(A: Algebra, x: Element, S) -> list:
    """Coefficients of ``x`` over the spanning set (or list of Elements) ``S``.

    Raises :class:`NotInSpan` with the irreducible residual.  On success the
    recombination is checked to reproduce ``x`` exactly.
    """
    cols = S.elements if isinstance(S, SpanningSet) else list(S)
    coeffs, res = solve(cols, x)
    if res:
        raise NotInSpan(res, f"residual with {len(res)} terms")
    back = Element()
    for c, e in zip(coeffs, cols):
        if c:
            back = back + e * c
    if back != x:
        raise AssertionError("recombination does not reproduce the target")
    return coeffs


def determinant(rows) -> object:
    """Fraction-free (Bareiss) determinant of a square matrix of scalars."""
    M = [[to_scalar(v) for v in r] for r in rows]
    n = len(M)
    sign, prev = 1, mpq(1)
    for k in range(n - 1):
        if not M[k][k]:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return mpq(0)
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev
        prev = M[k][k]
    return M[n - 1][n - 1] * sign if n else mpq(1)


# ----------------------------------------------------------------------
# relations
# ----------------------------------------------------------------------

@dataclass
class Relation:
    """``target = sum coeff_i * element_i + residual`` with labels for export."""

    target: Element
    terms: list  # (scalar, label, Element)
    residual: Element
    target_label: str = ""

    @property
    def ok(self) -> bool:
        return not self.residual

    def to_json(self, A: Algebra) -> dict:
        return {
            "target": self.target_label or A.format(self.target),
            "terms": [{"coeff": format_scalar(c), "element": lab} for c, lab, _ in self.terms],
            "residual": A.format(self.residual),
        }

    def combination(self) -> Element:
        out = Element()
        for c, _, e in self.terms:
            out = out + e * c
        return out


def decouple(A: Algebra, target, gens, maxdeg: int, names=None, maxder=None,
             target_label: str = "") -> Relation:
    """Write ``target`` over the spanning set of ``gens`` at its weight.

    Raises :class:`NotInSpan` when impossible.
    """
    if isinstance(target, str):
        target_label = target_label or target
        target = A.state(target)
    w = A.weight(target)
    if w is None or w is MIXED:
        raise ValueError("decouple needs a homogeneous nonzero target")
    S = spanning_set(A, gens, w, maxdeg, names=names, maxder=maxder)
    coeffs = express(A, target, S)
    terms = [(c, lab, e) for c, lab, e in zip(coeffs, S.labels, S.elements) if c]
    return Relation(target, terms, Element(), target_label)


# ----------------------------------------------------------------------
# R1 / R2 and formal cubic coordinates in the V_infinity cube
# ----------------------------------------------------------------------

# the m-tuples whose R2 relations eliminate C_{16,0,0}
R2_TUPLES_C16 = [(10, 2, 0, 0, 0), (9, 2, 1, 0, 0), (8, 3, 1, 0, 0), (7, 3, 2, 0, 0),
                 (6, 5, 1, 0, 0), (5, 4, 2, 1, 0), (4, 3, 2, 2, 1), (4, 4, 4, 0, 0)]


def _r1_terms(a, m, verbatim=False):
    a1, a2, a3, a4, a5 = a
    m1, m2, m3, m4, m5 = m
    # with a1+a2+a3 here the quintic leading symbol does not cancel
    first = a1 + a2 + a3 if verbatim else a1 + a2 + a4
    return [
        (first, (m4, m5), (m1, m2, m3)),
        (a1 + a3 + a5, (m3, m5), (m1, m2, m4)),
        (-(a1 + a2 + a3 + a4 + a5), (m3, m4), (m1, m2, m5)),
        (a5, (m2, m4), (m1, m3, m5)),
        (-(a1 + a4 + a5), (m2, m5), (m1, m3, m4)),
        (-(a1 + a2 + a3), (m1, m5), (m2, m3, m4)),
        (a4, (m2, m3), (m1, m4, m5)),
        (a3, (m1, m4), (m2, m3, m5)),
        (a1, (m1, m2), (m3, m4, m5)),
        (a2, (m1, m3), (m2, m4, m5)),
    ]


def build_R1(a, m, A: Algebra | None = None, *, verbatim=False) -> Element:
    """The ten-term combination of ``:W_{..} C_{...}:`` with weights ``a``.

    ``verbatim=True`` uses ``a1+a2+a3`` as the first coefficient (the form
    whose leading symbol fails to vanish).
    """
    from .presets import build_vinfty_cube, gen_C, gen_W
    if A is None:
        A = build_vinfty_cube()
    out = Element()
    for c, w, cc in _r1_terms([to_scalar(x) for x in a], m, verbatim):
        if c:
            out = out + A.no(gen_W(A, *w), gen_C(A, *cc)) * c
    return out


def build_R2(m, A: Algebra | None = None) -> Element:
    return build_R1((1, 0, 0, 0, 0), m, A)


def cubic_coordinates(A: Algebra, x: Element, fold: bool = True) -> dict:
    """Coordinates of the cubic part of ``x`` in the ``C_{a,b,0}`` (a >= b).

    Each cubic monomial :(d^l T)(d^m T)(d^n T): (l >= m >= n) is moved to
    the form with an underived last factor by integration by parts,
    ``(-1)^n sum_k C(n,k) C_{m+k, n+l-k, 0}``, so the result is exact only
    modulo total derivatives.  With ``fold`` the coordinate of
    ``C_{s-1,1,0}`` is traded for ``-1/2 C_{s,0,0}`` (from
    ``d C_{s-1,0,0} = C_{s,0,0} + 2 C_{s-1,1,0}``).  Only the T1 half of
    each ``C`` is read, which suffices for S3-invariant input.
    """
    t1 = A.gen_index("T1")
    out = {}
    weight = None
    for mono, c in x.items():
        if len(mono) != 3 or any(g != t1 for g, _ in mono):
            continue
        l, m, n = sorted((d for _, d in mono), reverse=True)
        weight = l + m + n + 6
        for k in range(n + 1):
            p, q = m + k, n + l - k
            key = (max(p, q), min(p, q))
            v = out.get(key, _ZERO) + c * ((-1) ** n * comb(n, k))
            if v:
                out[key] = v
            else:
                out.pop(key, None)
    if fold and weight is not None:
        s = weight - 6
        v = out.pop((s - 1, 1), None)
        if v:
            t = out.get((s, 0), _ZERO) - v / 2
            if t:
                out[(s, 0)] = t
            else:
                out.pop((s, 0), None)
    return out


def solve_cubic(A: Algebra, target: tuple, tuples=R2_TUPLES_C16) -> list:
    """b_i with ``C_target = sum b_i R2(tuples[i])`` in cubic coordinates."""
    from .presets import gen_C
    cols = [build_R2(m, A) for m in tuples]
    vecs = [cubic_coordinates(A, r) for r in cols]
    tgt = cubic_coordinates(A, gen_C(A, *target))
    coeffs, res = solve([Element(v) for v in vecs], Element(tgt),
                        key=lambda k: (-k[0], k[1]))
    if res:
        raise NotInSpan(Element(), f"no combination; leftover {dict(res.items())}")
    return coeffs


# ----------------------------------------------------------------------
# ideals
# ----------------------------------------------------------------------

def _ideal_layers(A: Algebra, idealgens, w: int) -> dict:
    """Echelon bases of the ideal generated by ``idealgens``, weight by weight up to w."""
    key = _row_key(None)
    layers: dict = {}
    pending = list(idealgens)
    gens = [(A.gen(n), A.weights[i]) for i, n in enumerate(A.names)]
    while pending:
        new = []
        for y in pending:
            wy = A.weight(y)
            if wy is None or wy is MIXED or wy > w:
                continue
            E = layers.setdefault(wy, _Echelon(key))
            if E.add(y.terms, 0):
                new.append(y)
        pending = []
        for y in new:
            wy = A.weight(y)
            for g, wg in gens:
                # every mode landing at weight 0..w
                for n in range(wg + wy - 1 - w, wg + wy):
                    z = A.nth_product(g, n, y)
                    if z:
                        pending.append(z)
    return layers


def ideal_membership(A: Algebra, x: Element, idealgens, w: int | None = None):
    """(ok, witness): is ``x`` in the weight-``w`` part of the ideal?

    The ideal is built by applying all modes of the generators to the ideal
    generators, keeping everything of weight at most ``w``.  The witness is
    the leftover after reduction (zero on success).
    """
    if not x:
        return True, Element()
    if w is None:
        w = A.weight(x)
    layers = _ideal_layers(A, [g for g in idealgens if g], w)
    E = layers.get(w)
    if E is None:
        return False, x
    v, _ = E.reduce(x.terms, {})
    return not v, Element(v)


# ----------------------------------------------------------------------
# primary corrections and the coupling constants
# ----------------------------------------------------------------------

def _partitions(n, largest=None):
    if n == 0:
        yield ()
        return
    largest = n if largest is None else min(largest, n)
    for k in range(largest, 0, -1):
        for rest in _partitions(n - k, k):
            yield (k,) + rest


def descendants(A: Algebra, L: Element, primaries, w: int) -> list:
    """L(-n1)...L(-nr) p for each primary p, at weight ``w``, nonzero and distinct."""
    out, seen = [], set()
    for p in primaries:
        wp = A.weight(p)
        if wp is None or wp is MIXED or wp >= w:
            continue
        for part in _partitions(w - wp):
            v = p
            for n in reversed(part):
                v = virasoro_mode(A, L, -n, v)
                if not v:
                    break
            if v and v not in seen:
                seen.add(v)
                out.append(v)
    return out


def primary_correction(A: Algebra, x: Element, L: Element, primaries=None) -> Element:
    """``x`` minus the descendant combination that makes it primary for ``L``.

    Descendants are Virasoro words applied to the vacuum and to the optional
    lower-weight ``primaries``.  Raises :class:`NotCorrectable` if no
    combination kills all positive modes.
    """
    N = A.weight(x)
    if N is None:
        return x
    if N is MIXED:
        raise ValueError("primary_correction needs a homogeneous state")
    base = [Element.vacuum()] + list(primaries or [])
    D = descendants(A, L, base, N)

    def modes(v):
        out = {}
        for n in range(1, N + 1):
            for m, c in virasoro_mode(A, L, n, v).items():
                out[(n,) + m] = c
        return Element(out)

    coeffs, res = solve([modes(d) for d in D], modes(x),
                        key=lambda k: (k[0], -len(k), tuple(factor_key(f) for f in k[1:])))
    if res:
        raise NotCorrectable(f"{len(res)} positive-mode components cannot be removed")
    out = x
    for c, d in zip(coeffs, D):
        if c:
            out = out - d * c
    return out


def match_coupling(A: Algebra | None = None, *, verbatim=False):
    """(lambda, mu) matching the weight-4 self product of the S3 Ising orbifold.

    ``W = mu * primary_correction(W4t, Ltot)``; its third product is split
    over ``W, :LL:, d^2 L`` and compared with the universal even-spin form.
    The overall sign of ``W`` is a convention: the branch with ``lambda > 0``
    is returned.  Raises :class:`NoSolution` when the two sides cannot match.
    """
    from .presets import build_ising_cube, even_spin_w4_product
    A = A or build_ising_cube()
    L = A.state("Ltot")
    P = primary_correction(A, A.state("W4t"), L)
    y = A.nth_product(P, 3, P)
    a, b, c = express(A, y, [P, A.no(L, L), A.derivative(L, 2)])
    lam_coeffs = even_spin_w4_product(verbatim=verbatim)
    # theirs: s_W*lam, s_LL*X, s_dd*X with X = -2303/4 lam^2 - 1
    sW, sLL, sdd = lam_coeffs
    # ours: mu*a, mu^2*b, mu^2*c  ->  X/mu^2 fixed twice
    k1, k2 = b / sLL, c / sdd
    if k1 != k2:
        raise NoSolution(f"X/mu^2 = {k1} from :LL: but {k2} from d^2 L")
    # X = k mu^2, lam = a mu / sW, X = -2303/4 lam^2 - 1
    denom = k1 + mpq(2303, 4) * a * a / (sW * sW)
    if not denom:
        raise NoSolution("degenerate system")
    mu2 = -1 / denom
    mu = _rational_sqrt(mu2)
    if mu is None:
        raise NoSolution(f"mu^2 = {mu2} has no rational root")
    lam = a * mu / sW
    if lam < 0:
        lam, mu = -lam, -mu
    return lam, mu


def _rational_sqrt(q):
    from gmpy2 import is_square, isqrt
    q = mpq(q)
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    if not (is_square(n) and is_square(d)):
        return None
    return mpq(isqrt(n), isqrt(d))
