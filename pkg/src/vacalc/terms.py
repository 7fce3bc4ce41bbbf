"""States of a finitely generated vertex algebra.

A *factor* is a pair ``(generator index, derivative order)``.  A *monomial*
is a tuple of factors read as the right-nested normally ordered product
``:f1(:f2(...(:f_{r-1} f_r:)...)):``; the empty tuple is the vacuum.  An
:class:`Element` is a finite linear combination of monomials.

Canonical monomials have factors sorted by ``(generator index, -derivative)``
so e.g. ``NO(d^2(L), L)`` is canonical while ``NO(L, d^2(L))`` is not.
Canonicalization itself needs the OPE table and lives in
:mod:`vacalc.engine`; this module only stores, compares, parses and prints.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

from .coeff import (
    ETA, I, SQRT3, ZETA, Cyclotomic, RationalFunction, ScalarParseError,
    format_scalar, is_scalar, mpq, parameter, to_scalar,
)

__all__ = [
    "GeneratorRef", "Factor", "Monomial", "Element", "VACUUM", "MIXED",
    "factor_key", "is_canonical", "mono_weight", "weight", "degree",
    "leading_part", "parse_element", "format_element", "format_monomial",
    "ElementParseError", "derivative", "canonicalize",
]

Factor = tuple  # (generator index, derivative order)
Monomial = tuple  # tuple of factors, () is the vacuum

VACUUM: Monomial = ()


class _Mixed:
    def __repr__(self):
        return "Mixed"


MIXED = _Mixed()


@dataclass(frozen=True)
class GeneratorRef:
    index: int
    name: str
    weight: int


def factor_key(f):
    return (f[0], -f[1])


def is_canonical(m: Monomial) -> bool:
    return all(factor_key(m[i]) <= factor_key(m[i + 1]) for i in range(len(m) - 1))


def mono_weight(m: Monomial, weights) -> int:
    return sum(weights[g] + d for g, d in m)


class Element:
    """Immutable linear combination ``{monomial: scalar}`` with no zero entries."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms=None):
        if terms is None:
            terms = {}
        elif not isinstance(terms, dict):
            terms = dict(terms)
        self.terms = {m: to_scalar(c) for m, c in terms.items() if c}
        self._hash = None

    @classmethod
    def _wrap(cls, d: dict) -> "Element":
        # trusted constructor: d already has scalar values; zeros are dropped
        obj = cls.__new__(cls)
        obj.terms = {m: c for m, c in d.items() if c}
        obj._hash = None
        return obj

    @classmethod
    def vacuum(cls, coeff=1) -> "Element":
        return cls._wrap({VACUUM: to_scalar(coeff)})

    @classmethod
    def factor(cls, gen: int, d: int = 0) -> "Element":
        return cls._wrap({((gen, d),): mpq(1)})

    # container protocol ---------------------------------------------------
    def items(self):
        return self.terms.items()

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def __bool__(self):
        return bool(self.terms)

    def coeff(self, m: Monomial):
        return self.terms.get(m, mpq(0))

    # arithmetic ----------------------------------------------------------
    def __add__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        d = dict(self.terms)
        for m, c in other.terms.items():
            d[m] = d.get(m, 0) + c
        return Element._wrap(d)

    def __sub__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        d = dict(self.terms)
        for m, c in other.terms.items():
            d[m] = d.get(m, 0) - c
        return Element._wrap(d)

    def __neg__(self):
        return Element._wrap({m: -c for m, c in self.terms.items()})

    def __mul__(self, s):
        if isinstance(s, Element) or not (is_scalar(s) or isinstance(s, int)):
            return NotImplemented
        s = to_scalar(s)
        if not s:
            return Element()
        return Element._wrap({m: c * s for m, c in self.terms.items()})

    __rmul__ = __mul__

    def __truediv__(self, s):
        s = to_scalar(s)
        return Element._wrap({m: c / s for m, c in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, Element):
            return self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def map_coeffs(self, fn) -> "Element":
        return Element._wrap({m: fn(c) for m, c in self.terms.items()})

    def __repr__(self):
        return f"Element({len(self.terms)} terms)"


def weight(x: Element, weights):
    """Common weight of all monomials, ``MIXED`` if they differ, None for 0."""
    ws = {mono_weight(m, weights) for m in x.terms}
    if not ws:
        return None
    if len(ws) > 1:
        return MIXED
    return ws.pop()


def degree(x: Element) -> int:
    """Leading-symbol degree: the largest factor count (-1 for zero)."""
    return max((len(m) for m in x.terms), default=-1)


def leading_part(x: Element) -> Element:
    d = degree(x)
    return Element._wrap({m: c for m, c in x.terms.items() if len(m) == d})


def derivative(x: Element, A) -> Element:
    return A.derivative(x)


def canonicalize(x: Element, A) -> Element:
    return A.canonicalize(x)


# ---------------------------------------------------------------------------
# printing
# ---------------------------------------------------------------------------

def _factor_str(f, names) -> str:
    g, d = f
    return names[g] if d == 0 else f"d^{d}({names[g]})"


def format_monomial(m: Monomial, names) -> str:
    if not m:
        return "one"
    return "NO(" + ", ".join(_factor_str(f, names) for f in m) + ")"


def _sort_key(m, weights):
    return (mono_weight(m, weights), len(m), tuple(factor_key(f) for f in m))


def sorted_monomials(x: Element, weights):
    return sorted(x.terms, key=lambda m: _sort_key(m, weights))


def format_element(x: Element, names, weights) -> str:
    """Render in the element grammar: ``term (('+'|'-') term)*``."""
    if not x.terms:
        return "0"
    out = []
    for m in sorted_monomials(x, weights):
        c = x.terms[m]
        mono = format_monomial(m, names)
        if isinstance(c, (Cyclotomic, RationalFunction)):
            sign, body = "+", f"({format_scalar(c)})*{mono}"
        else:
            sign = "-" if c < 0 else "+"
            a = abs(c)
            body = mono if a == 1 else f"{format_scalar(a)}*{mono}"
        if not out:
            out.append(body if sign == "+" else f"-{body}")
        else:
            out.append(f" {sign} {body}")
    return "".join(out)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

class ElementParseError(ValueError):
    pass


_ETOKEN = re.compile(
    r"\s*(?:(\d+)|(@?[A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^(),]))")


def _etokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _ETOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ElementParseError(f"unexpected character at {pos}: {text[pos:pos + 20]!r}")
        pos = m.end()
        if m.group(1):
            out.append(("int", int(m.group(1))))
        elif m.group(2):
            out.append(("name", m.group(2)))
        else:
            op = m.group(3)
            out.append(("op", "^" if op == "**" else op))
    return out


_SCALAR_CONSTANTS = {"zeta": ZETA, "eta": ETA, "I": I, "sqrt3": SQRT3}


class _ElementParser:
    """Recursive descent over a superset of the element grammar.

    Values are scalars or Elements; scalars mixed into sums become multiples
    of the vacuum.  Names resolve to generators, then named states, then
    scalar symbols.  ``NO(x1, ..., xr)`` nests to the right and accepts
    arbitrary sub-expressions; ``d^n(x)`` and ``d(x)`` differentiate.
    """

    def __init__(self, tokens, A, scalars):
        self.toks = tokens
        self.i = 0
        self.A = A
        self.scalars = scalars

    def peek(self, off=0):
        j = self.i + off
        return self.toks[j] if j < len(self.toks) else (None, None)

    def take(self, op=None):
        tok = self.peek()
        if op is not None and tok != ("op", op):
            raise ElementParseError(f"expected {op!r} at token {self.i}, got {tok[1]!r}")
        self.i += 1
        return tok

    # value helpers -------------------------------------------------------
    @staticmethod
    def _as_element(v):
        return v if isinstance(v, Element) else Element.vacuum(v)

    def _add(self, a, b, sign):
        if not isinstance(a, Element) and not isinstance(b, Element):
            return a + b if sign > 0 else a - b
        a, b = self._as_element(a), self._as_element(b)
        return a + b if sign > 0 else a - b

    def _mul(self, a, b):
        if isinstance(a, Element) and isinstance(b, Element):
            raise ElementParseError("product of two states: use NO(a, b)")
        return a * b

    # grammar -------------------------------------------------------------
    def expr(self):
        sign = 1
        if self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
        val = self.term()
        if sign < 0:
            val = -val
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            val = self._add(val, self.term(), 1 if op == "+" else -1)
        return val

    def term(self):
        val = self.power()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.power()
            if op == "*":
                val = self._mul(val, rhs)
            else:
                if isinstance(rhs, Element):
                    raise ElementParseError("cannot divide by a state")
                val = val / rhs
        return val

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            if isinstance(base, Element):
                raise ElementParseError("cannot raise a state to a power")
            self.take()
            neg = self.peek() == ("op", "-")
            if neg:
                self.take()
            kind, n = self.take()
            if kind != "int":
                raise ElementParseError("exponent must be an integer")
            base = base ** (-n if neg else n)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "int":
            return mpq(val)
        if kind == "op":
            if val == "(":
                v = self.expr()
                self.take(")")
                return v
            if val == "-":
                return -self.power()
            raise ElementParseError(f"unexpected {val!r}")
        if kind is None:
            raise ElementParseError("unexpected end of input")
        name = val
        if name == "one":
            return Element.vacuum()
        if name == "NO" and self.peek() == ("op", "("):
            self.take("(")
            args = [self.expr()]
            while self.peek() == ("op", ","):
                self.take()
                args.append(self.expr())
            self.take(")")
            args = [self._as_element(a) for a in args]
            out = args[-1]
            for a in reversed(args[:-1]):
                out = self.A.no(a, out)
            return out
        if name == "d" and self.peek() in (("op", "^"), ("op", "(")):
            n = 1
            if self.peek() == ("op", "^"):
                self.take()
                kind, n = self.take()
                if kind != "int":
                    raise ElementParseError("derivative order must be an integer")
            self.take("(")
            x = self._as_element(self.expr())
            self.take(")")
            return self.A.derivative(x, n)
        if name.startswith("@"):
            return self.A.state(name[1:])
        idx = self.A.gen_index(name)
        if idx is not None:
            return Element.factor(idx)
        st = self.A.state(name, missing_ok=True)
        if st is not None:
            return st
        if name in self.scalars:
            return self.scalars[name]
        if name in _SCALAR_CONSTANTS:
            return _SCALAR_CONSTANTS[name]
        raise ElementParseError(f"unknown name {name!r}")


def parse_element(text: str, A, scalars: dict | None = None) -> Element:
    """Parse ``text`` over algebra ``A`` into a canonical Element."""
    if scalars is None:
        scalars = A.scalar_names()
    p = _ElementParser(_etokenize(text), A, scalars)
    try:
        v = p.expr()
    except ScalarParseError as e:
        raise ElementParseError(str(e)) from e
    if p.i != len(p.toks):
        raise ElementParseError(f"trailing input at token {p.i} in {text[:60]!r}")
    return p._as_element(v)


def raw_element(pairs: Iterable) -> Element:
    """Element from ``(coeff, [factor, ...])`` pairs without canonicalizing."""
    d = {}
    for c, fs in pairs:
        m = tuple(tuple(f) for f in fs)
        d[m] = d.get(m, 0) + to_scalar(c)
    return Element._wrap(d)


def default_scalar_names(var: str | None) -> dict:
    names = {}
    if var:
        names[var] = parameter(var)
    return names
