"""n-th products of states from a generator OPE table.

The recursion follows the classical OPE calculus:

* generator/generator: the table, plus ``(d a)_(n) b = -n a_(n-1) b`` and
  ``a_(m) d b = d(a_(m) b) + m a_(m-1) b``;
* composite right argument: noncommutative Wick
  ``a_(n):bc: = :(a_(n)b)c: + :b(a_(n)c): + sum_k C(n,k) (a_(n-k)b)_(k-1)c``;
* composite left argument:
  ``(:ab:)_(n)c = sum_k :(d^k a)(b_(n+k)c):/k! + sum_k b_(n-k-1)(a_(k)c)``;
* negative n: ``a_(-n-1)b = :(d^n a) b:/n!``.

Normal ordering into the canonical (sorted) basis uses quasi-associativity
and quasi-commutativity.  Internally states are plain dicts
``{monomial: scalar}``; every public method takes and returns
:class:`~vacalc.terms.Element`.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from math import comb, factorial

from .coeff import evaluate_at, format_scalar, mpq, parameter, to_scalar
from .terms import (
    MIXED, VACUUM, Element, GeneratorRef, factor_key, format_element,
    mono_weight, parse_element, sorted_monomials,
)

__all__ = [
    "Algebra", "UnknownGenerator", "TableIncomplete", "Report",
    "skew_check", "commutator_check", "is_singular", "virasoro_mode",
]


class UnknownGenerator(KeyError):
    pass


class TableIncomplete(LookupError):
    pass


_ONE = mpq(1)
_INV_FACT = [mpq(1, factorial(n)) for n in range(64)]


def _inv_fact(n):
    return _INV_FACT[n] if n < 64 else mpq(1, factorial(n))


def _acc(res: dict, src: dict, c=_ONE):
    if c == 1 and type(c) is type(_ONE):
        for m, v in src.items():
            if m in res:
                res[m] = res[m] + v
            else:
                res[m] = v
    else:
        for m, v in src.items():
            t = v * c
            if m in res:
                res[m] = res[m] + t
            else:
                res[m] = t


def _clean(d: dict) -> dict:
    return {m: v for m, v in d.items() if v}


class _NoCache(dict):
    """Stand-in cache that never stores (memoization disabled)."""

    def __setitem__(self, key, value):
        pass


class Algebra:
    """Generators with weights plus an OPE table.

    ``opes`` maps ``(name_a, name_b)`` to the pole list ``[P1, P2, ...]``
    where ``P_j`` is the coefficient of ``(z-w)^-j``, i.e. ``a_(j-1) b``.
    Poles may be Elements or strings in the element grammar.  Pairs missing
    from the table are filled in by skew-symmetry when their transpose is
    known.  ``states`` maps names to element strings (or Elements) and is
    resolved lazily; ``resolver`` may synthesize further named states.
    """

    def __init__(self, name, generators, opes, *, param=None, states=None,
                 scalars=None, resolver=None, memo=True, meta=None):
        self.name = name
        self.param = param
        self.generators = [GeneratorRef(i, g, int(w)) for i, (g, w) in enumerate(generators)]
        self.weights = [g.weight for g in self.generators]
        self.names = [g.name for g in self.generators]
        self._index = {g.name: g.index for g in self.generators}
        self._scalars = dict(scalars or {})
        if param and param not in self._scalars:
            self._scalars[param] = parameter(param)
        self._raw_opes = {}
        for (a, b), poles in opes.items():
            ia, ib = self.gen_index(a), self.gen_index(b)
            if ia is None or ib is None:
                raise UnknownGenerator(f"{a!r} or {b!r}")
            self._raw_opes[(ia, ib)] = list(poles)
        self._state_src = dict(states or {})
        self._states = {}
        self._resolver = resolver
        self.meta = dict(meta or {})
        self._lock = threading.RLock()
        self.memo = memo
        self._reset_caches()

    # ------------------------------------------------------------------
    # bookkeeping
    # ------------------------------------------------------------------
    def _reset_caches(self):
        mk = dict if self.memo else _NoCache
        self._poles = {}
        self._pending = set()
        self._c_prod_gen = mk()
        self._c_prod = mk()
        self._c_ins = mk()
        self._c_no = mk()
        self._c_der = mk()
        self._c_dern = mk()

    def cache_size(self) -> int:
        return sum(len(c) for c in (self._c_prod_gen, self._c_prod, self._c_ins,
                                    self._c_no, self._c_der, self._c_dern))

    def clear_cache(self):
        poles = self._poles
        self._reset_caches()
        self._poles = poles

    def export_cache(self) -> dict:
        return {"prod_gen": dict(self._c_prod_gen), "prod": dict(self._c_prod),
                "ins": dict(self._c_ins), "no": dict(self._c_no),
                "der": dict(self._c_der), "dern": dict(self._c_dern)}

    def import_cache(self, data: dict):
        if not self.memo:
            return
        self._c_prod_gen.update(data.get("prod_gen", {}))
        self._c_prod.update(data.get("prod", {}))
        self._c_ins.update(data.get("ins", {}))
        self._c_no.update(data.get("no", {}))
        self._c_der.update(data.get("der", {}))
        self._c_dern.update(data.get("dern", {}))

    def fingerprint(self) -> str:
        import hashlib
        h = hashlib.sha256()
        h.update(repr((self.name, self.param, self.names, self.weights)).encode())
        # scalar values distinguish specializations that share a table
        for key in sorted(self._scalars):
            h.update(repr((key, format_scalar(self._scalars[key]))).encode())
        for key in sorted(self._raw_opes):
            for p in self._raw_opes[key]:
                h.update(repr((key, p if isinstance(p, str) else sorted(map(repr, p.items())))).encode())
        return h.hexdigest()[:16]

    def gen_index(self, name):
        return self._index.get(name)

    def gen(self, name) -> Element:
        i = self.gen_index(name)
        if i is None:
            raise UnknownGenerator(name)
        return Element.factor(i)

    def scalar_names(self) -> dict:
        return self._scalars

    def parse(self, text: str) -> Element:
        return parse_element(text, self)

    def format(self, x: Element) -> str:
        return format_element(x, self.names, self.weights)

    def state(self, name, missing_ok=False):
        if name in self._states:
            return self._states[name]
        src = self._state_src.get(name)
        if src is None and self._resolver is not None:
            src = self._resolver(self, name)
        if src is None:
            if missing_ok:
                return None
            raise KeyError(f"unknown state {name!r} in {self.name}")
        val = self.parse(src) if isinstance(src, str) else src
        self._states[name] = val
        return val

    def state_names(self):
        return list(self._state_src)

    def add_state(self, name, value):
        self._state_src[name] = value
        self._states.pop(name, None)

    def __repr__(self):
        return f"Algebra({self.name!r}, gens={self.names})"

    # ------------------------------------------------------------------
    # the table
    # ------------------------------------------------------------------
    def _mono_w(self, m):
        w = self.weights
        return sum(w[g] + d for g, d in m)

    def poles(self, i: int, j: int) -> list:
        """Canonical pole dicts for generators i, j (index r holds i_(r) j)."""
        p = self._poles.get((i, j))
        if p is not None:
            return p
        # resolution is serialized; the reentrant lock lets the same thread
        # recurse into transposed pairs while others wait
        with self._lock:
            p = self._poles.get((i, j))
            if p is not None:
                return p
            if (i, j) in self._pending:
                raise TableIncomplete(f"cyclic dependency resolving ({self.names[i]}, {self.names[j]})")
            self._pending.add((i, j))
            try:
                if (i, j) in self._raw_opes:
                    p = [self._canon_raw(x).terms for x in self._raw_opes[(i, j)]]
                elif (j, i) in self._raw_opes:
                    p = self._skew_poles(self.poles(j, i))
                else:
                    raise TableIncomplete(f"no OPE for ({self.names[i]}, {self.names[j]})")
            finally:
                self._pending.discard((i, j))
            while p and not p[-1]:
                p.pop()
            self._poles[(i, j)] = p
            return p

    def _canon_raw(self, x) -> Element:
        if isinstance(x, str):
            return self.parse(x)
        return self.canonicalize(x)

    def _skew_poles(self, P: list) -> list:
        # b_(n) a = sum_{r>=n} (-1)^(r+1) d^(r-n)(a_(r) b)/(r-n)!
        out = []
        for n in range(len(P)):
            res = {}
            for r in range(n, len(P)):
                if not P[r]:
                    continue
                sgn = 1 if (r + 1) % 2 == 0 else -1
                d = self._dern_d(P[r], r - n)
                _acc(res, d, mpq(sgn) * _inv_fact(r - n))
            out.append(_clean(res))
        return out

    def table_pairs(self):
        return sorted(self._raw_opes)

    # ------------------------------------------------------------------
    # derivatives
    # ------------------------------------------------------------------
    def _der(self, m) -> dict:
        r = self._c_der.get(m)
        if r is not None:
            return r
        if not m:
            return {}
        f = m[0]
        rest = m[1:]
        res = {((f[0], f[1] + 1),) + rest: _ONE}
        if rest:
            for mm, c in self._der(rest).items():
                _acc(res, self._ins(f, mm), c)
        res = _clean(res)
        self._c_der[m] = res
        return res

    def _dern(self, m, n) -> dict:
        if n == 0:
            return {m: _ONE}
        if n == 1:
            return self._der(m)
        key = (m, n)
        r = self._c_dern.get(key)
        if r is not None:
            return r
        prev = self._dern(m, n - 1)
        res = {}
        for mm, c in prev.items():
            _acc(res, self._der(mm), c)
        res = _clean(res)
        self._c_dern[key] = res
        return res

    def _dern_d(self, x: dict, n) -> dict:
        if n == 0:
            return x
        res = {}
        for m, c in x.items():
            _acc(res, self._dern(m, n), c)
        return _clean(res)

    # ------------------------------------------------------------------
    # normal ordering
    # ------------------------------------------------------------------
    def _ins(self, f, m) -> dict:
        """Canonical :f m: for a factor f and canonical monomial m."""
        if not m:
            return {(f,): _ONE}
        y = m[0]
        if factor_key(f) <= factor_key(y):
            return {(f,) + m: _ONE}
        key = (f, m)
        r = self._c_ins.get(key)
        if r is not None:
            return r
        rest = m[1:]
        res = {}
        # :f :y R:: = :y :f R:: + sum_j (-1)^j/(j+1)! :(d^{j+1}(f_(j) y)) R:
        for mm, c in self._ins(f, rest).items():
            _acc(res, self._ins(y, mm), c)
        top = self.weights[f[0]] + f[1] + self.weights[y[0]] + y[1]
        for j in range(top):
            p = self._prod_gen(f, j, y)
            if not p:
                continue
            d = self._dern_d(p, j + 1)
            if not d:
                continue
            c = _inv_fact(j + 1) if j % 2 == 0 else -_inv_fact(j + 1)
            _acc(res, self._no_dm(d, rest), c)
        res = _clean(res)
        self._c_ins[key] = res
        return res

    def _ins_d(self, f, x: dict) -> dict:
        res = {}
        for m, c in x.items():
            _acc(res, self._ins(f, m), c)
        return res

    def _no(self, X, Y) -> dict:
        """Canonical :X Y: for canonical monomials X, Y."""
        if not X:
            return {Y: _ONE}
        if not Y:
            return {X: _ONE}
        if len(X) == 1:
            return self._ins(X[0], Y)
        key = (X, Y)
        r = self._c_no.get(key)
        if r is not None:
            return r
        a = X[0]
        rest = X[1:]
        res = {}
        # :(:a R:) Y: = :a :R Y:: + sum_k 1/(k+1)! (:(d^{k+1}a)(R_(k)Y): + :(d^{k+1}R)(a_(k)Y):)
        for mm, c in self._no(rest, Y).items():
            _acc(res, self._ins(a, mm), c)
        wy = self._mono_w(Y)
        for k in range(self._mono_w(rest) + wy):
            p = self._prod(rest, k, Y)
            if p:
                _acc(res, self._ins_d((a[0], a[1] + k + 1), p), _inv_fact(k + 1))
        for k in range(self.weights[a[0]] + a[1] + wy):
            q = self._prod(((a,)), k, Y)
            if q:
                d = self._dern(rest, k + 1)
                if d:
                    _acc(res, self._no_dd(d, q), _inv_fact(k + 1))
        res = _clean(res)
        self._c_no[key] = res
        return res

    def _no_dm(self, x: dict, Y) -> dict:
        res = {}
        for m, c in x.items():
            _acc(res, self._no(m, Y), c)
        return res

    def _no_dd(self, x: dict, y: dict) -> dict:
        res = {}
        for m, c in x.items():
            for mm, cc in y.items():
                _acc(res, self._no(m, mm), c * cc)
        return _clean(res)

    # ------------------------------------------------------------------
    # products
    # ------------------------------------------------------------------
    def _prod_gen(self, f, n, g) -> dict:
        """(d^p a)_(n) (d^q b) for generator factors and n >= 0."""
        key = (f, n, g)
        r = self._c_prod_gen.get(key)
        if r is not None:
            return r
        a, p = f
        b, q = g
        res = {}
        if p <= n:
            # (d^p a)_(n) = (-1)^p n!/(n-p)! a_(n-p)
            s1 = factorial(n) // factorial(n - p) * (-1 if p % 2 else 1)
            m = n - p
            P = self.poles(a, b)
            # a_(m) d^q b = sum_i C(q,i) m!/(m-i)! d^{q-i}(a_(m-i) b)
            for i in range(min(q, m) + 1):
                r_idx = m - i
                if r_idx >= len(P) or not P[r_idx]:
                    continue
                coef = s1 * comb(q, i) * (factorial(m) // factorial(m - i))
                _acc(res, self._dern_d(P[r_idx], q - i), mpq(coef))
        res = _clean(res)
        self._c_prod_gen[key] = res
        return res

    def _prod(self, X, n, Y) -> dict:
        """X_(n) Y for canonical monomials and n >= 0."""
        if not X or not Y:
            return {}
        wx, wy = self._mono_w(X), self._mono_w(Y)
        if wx + wy - n - 1 < 0:
            return {}
        if len(X) == 1 and len(Y) == 1:
            return self._prod_gen(X[0], n, Y[0])
        key = (X, n, Y)
        r = self._c_prod.get(key)
        if r is not None:
            return r
        res = {}
        if len(X) == 1:
            a = X[0]
            b = Y[0]
            rest = Y[1:]
            # :(a_(n) b) R:
            p = self._prod_gen(a, n, b)
            if p:
                _acc(res, self._no_dm(p, rest), _ONE)
            # :b (a_(n) R):
            q = self._prod(X, n, rest)
            if q:
                _acc(res, self._ins_d(b, q), _ONE)
            # sum_{k=1}^n C(n,k) (a_(n-k) b)_(k-1) R
            for k in range(1, n + 1):
                p = self._prod_gen(a, n - k, b)
                if p:
                    _acc(res, self._prod_dm(p, k - 1, rest), mpq(comb(n, k)))
        else:
            a = X[0]
            rest = X[1:]
            wr = self._mono_w(rest)
            # sum_k 1/k! :(d^k a)(R_(n+k) Y):
            for k in range(max(wr + wy - n, 0)):
                p = self._prod(rest, n + k, Y)
                if p:
                    _acc(res, self._ins_d((a[0], a[1] + k), p), _inv_fact(k))
            # sum_k R_(n-k-1)(a_(k) Y)
            for k in range(self.weights[a[0]] + a[1] + wy):
                q = self._prod((a,), k, Y)
                if not q:
                    continue
                if n - k - 1 >= 0:
                    for mm, c in q.items():
                        _acc(res, self._prod(rest, n - k - 1, mm), c)
                else:
                    j = k - n
                    d = self._dern(rest, j)
                    _acc(res, self._no_dd(d, q), _inv_fact(j))
        res = _clean(res)
        self._c_prod[key] = res
        return res

    def _prod_dm(self, x: dict, n, Y) -> dict:
        res = {}
        for m, c in x.items():
            _acc(res, self._prod(m, n, Y), c)
        return res

    def _prod_dd(self, x: dict, n, y: dict) -> dict:
        res = {}
        if n >= 0:
            for m, c in x.items():
                for mm, cc in y.items():
                    _acc(res, self._prod(m, n, mm), c * cc)
        else:
            j = -n - 1
            for m, c in x.items():
                d = self._dern(m, j)
                for mm, cc in y.items():
                    _acc(res, self._no_dm(d, mm), c * cc * _inv_fact(j))
        return _clean(res)

    # ------------------------------------------------------------------
    # public API on Elements
    # ------------------------------------------------------------------
    def canonicalize(self, x: Element) -> Element:
        """Rewrite every monomial of ``x`` into the sorted basis."""
        res = {}
        for m, c in x.items():
            if not m:
                _acc(res, {VACUUM: _ONE}, c)
                continue
            cur = {(m[-1],): _ONE}
            for f in reversed(m[:-1]):
                cur = _clean(self._ins_d(f, cur))
            _acc(res, cur, c)
        return Element._wrap(res)

    def derivative(self, x: Element, n: int = 1) -> Element:
        return Element._wrap(self._dern_d(x.terms, n))

    def no(self, x: Element, y: Element) -> Element:
        """Normally ordered product :xy: in canonical form."""
        return Element._wrap(self._no_dd(x.terms, y.terms))

    def nop(self, *xs: Element) -> Element:
        """Right-nested :x1(:x2(...):):."""
        out = xs[-1]
        for x in reversed(xs[:-1]):
            out = self.no(x, out)
        return out

    def nth_product(self, a: Element, n: int, b: Element) -> Element:
        """a_(n) b for any integer n."""
        return Element._wrap(self._prod_dd(a.terms, n, b.terms))

    def pole_bound(self, a: Element, b: Element) -> int:
        """Largest n with a_(n) b possibly nonzero (by weight)."""
        wa = max((self._mono_w(m) for m in a.terms), default=0)
        wb = max((self._mono_w(m) for m in b.terms), default=0)
        return wa + wb - 1

    def ope_singular(self, a: Element, b: Element) -> list:
        """[a_(0) b, a_(1) b, ...] up to the last nonzero pole."""
        out = [self.nth_product(a, n, b) for n in range(self.pole_bound(a, b) + 1)]
        while out and not out[-1]:
            out.pop()
        return out

    def weight(self, x: Element):
        ws = {self._mono_w(m) for m in x.terms}
        if not ws:
            return None
        return ws.pop() if len(ws) == 1 else MIXED

    def mono_weight(self, m) -> int:
        return mono_weight(m, self.weights)

    def sorted_monomials(self, x: Element):
        return sorted_monomials(x, self.weights)

    # ------------------------------------------------------------------
    # specialization
    # ------------------------------------------------------------------
    def specialize(self, value, name=None) -> "Algebra":
        """Copy with the parameter replaced by the rational ``value``."""
        if not self.param:
            return self
        v = to_scalar(value)
        ev = lambda c: evaluate_at(c, v)  # noqa: E731
        opes = {}
        for (i, j), poles in self._raw_opes.items():
            new = []
            for p in poles:
                # strings re-parse against the substituted scalars below
                new.append(p if isinstance(p, str) else self._canon_raw(p).map_coeffs(ev))
            opes[(self.names[i], self.names[j])] = new
        scalars = {k: ev(s) for k, s in self._scalars.items() if k != self.param}
        scalars[self.param] = v
        states = {}
        for key in self._state_src:
            src = self._state_src[key]
            states[key] = src if isinstance(src, str) else src.map_coeffs(ev)
        A = Algebra(name or f"{self.name}@{self.param}={v}",
                    [(g.name, g.weight) for g in self.generators], opes,
                    param=None, states=states, scalars=scalars,
                    resolver=self._resolver, memo=self.memo,
                    meta=dict(self.meta, specialized_at=str(v), parent=self.name))
        return A


# ----------------------------------------------------------------------
# checks
# ----------------------------------------------------------------------

@dataclass
class Report:
    """Outcome of a consistency check: named residuals that must all vanish."""

    name: str
    residuals: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(self.residuals.values())

    def failures(self):
        return {k: v for k, v in self.residuals.items() if v}

    def __bool__(self):
        return self.ok


def skew_check(A: Algebra, a: Element, b: Element, nmax: int | None = None) -> Report:
    """b_(n) a against sum_j (-1)^(n+j+1) d^j(a_(n+j) b)/j! for 0 <= n <= nmax."""
    top = A.pole_bound(a, b)
    if nmax is None:
        nmax = top
    forward = [A.nth_product(a, n, b) for n in range(top + 1)]
    rep = Report("skew")
    for n in range(nmax + 1):
        lhs = A.nth_product(b, n, a)
        rhs = Element()
        for j in range(0, top + 1 - n):
            term = forward[n + j]
            if term:
                sgn = -1 if (n + j) % 2 == 0 else 1
                rhs = rhs + A.derivative(term, j) * (mpq(sgn) * _inv_fact(j))
        rep.residuals[n] = lhs - rhs
    return rep


def commutator_check(A: Algebra, a: Element, m: int, b: Element, n: int, v: Element) -> Report:
    """a_(m)(b_(n) v) - b_(n)(a_(m) v) - sum_j C(m,j) (a_(j) b)_(m+n-j) v, m, n >= 0."""
    lhs = A.nth_product(a, m, A.nth_product(b, n, v)) - A.nth_product(b, n, A.nth_product(a, m, v))
    rhs = Element()
    for j in range(m + 1):
        ab = A.nth_product(a, j, b)
        if ab:
            rhs = rhs + A.nth_product(ab, m + n - j, v) * comb(m, j)
    return Report("commutator", {(m, n): lhs - rhs})


def virasoro_mode(A: Algebra, L: Element, n: int, v: Element) -> Element:
    """L(n) v with L(z) = sum L(n) z^(-n-2), i.e. L_(n+1) v."""
    return A.nth_product(L, n + 1, v)


def is_singular(A: Algebra, v: Element, L: Element):
    """(ok, witness): L(n) v = 0 for 1 <= n <= N and L(0) v = N v."""
    N = A.weight(v)
    witness = {}
    if N is None or N is MIXED:
        return False, {"weight": N}
    for n in range(1, N + 1):
        r = virasoro_mode(A, L, n, v)
        if r:
            witness[n] = r
    r0 = virasoro_mode(A, L, 0, v) - v * N
    if r0:
        witness[0] = r0
    return not witness, witness
