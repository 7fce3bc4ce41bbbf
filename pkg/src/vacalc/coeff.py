"""Exact scalars: rationals, the cyclotomic field Q(zeta_12), and rational
functions in one formal parameter over it.

Values are represented by the cheapest type that holds them:

* ``mpq`` (gmpy2) for plain rationals,
* :class:`Cyclotomic` for constants involving zeta,
* :class:`RationalFunction` for anything depending on the parameter.

Every arithmetic result is demoted to the smallest of these, so equal
values always have equal types and canonical forms are unique.
"""

from __future__ import annotations

import re
from functools import reduce

from gmpy2 import mpq

__all__ = [
    "mpq", "Cyclotomic", "Poly", "RationalFunction", "DivisionByZero",
    "PoleAtValue", "ScalarParseError", "ZETA", "ETA", "I", "SQRT3",
    "to_scalar", "is_scalar", "param_of", "evaluate_at", "parse_scalar",
    "format_scalar", "parameter",
]

ZERO = mpq(0)
ONE = mpq(1)


class DivisionByZero(ZeroDivisionError):
    pass


class PoleAtValue(ValueError):
    """The denominator of a rational function vanishes at the requested value."""


class ScalarParseError(ValueError):
    pass


def _q(x):
    if isinstance(x, int) or type(x) is type(ZERO):
        return mpq(x)
    if isinstance(x, str):
        return mpq(x)
    raise TypeError(f"not a rational: {x!r}")


# ---------------------------------------------------------------------------
# Q(zeta_12)
# ---------------------------------------------------------------------------

class Cyclotomic:
    """c0 + c1*z + c2*z^2 + c3*z^3 with z^4 = z^2 - 1 (z a primitive 12th root of unity)."""

    __slots__ = ("c", "_hash")

    def __init__(self, coeffs):
        c = tuple(mpq(x) for x in coeffs)
        if len(c) != 4:
            raise ValueError("Cyclotomic needs exactly four coefficients")
        self.c = c
        self._hash = None

    @staticmethod
    def make(c0, c1, c2, c3):
        """Build and demote: returns an ``mpq`` when the zeta-part vanishes."""
        Q = type(ZERO)
        if type(c0) is not Q or type(c1) is not Q or type(c2) is not Q or type(c3) is not Q:
            c0, c1, c2, c3 = mpq(c0), mpq(c1), mpq(c2), mpq(c3)
        if not (c1 or c2 or c3):
            return c0
        obj = Cyclotomic.__new__(Cyclotomic)
        obj.c = (c0, c1, c2, c3)
        obj._hash = None
        return obj

    def _coerce(self, other):
        if isinstance(other, Cyclotomic):
            return other.c
        if isinstance(other, int) or type(other) is type(ZERO):
            return (mpq(other), ZERO, ZERO, ZERO)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a = self.c
        return Cyclotomic.make(a[0] + o[0], a[1] + o[1], a[2] + o[2], a[3] + o[3])

    __radd__ = __add__

    def __neg__(self):
        a = self.c
        return Cyclotomic.make(-a[0], -a[1], -a[2], -a[3])

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a = self.c
        return Cyclotomic.make(a[0] - o[0], a[1] - o[1], a[2] - o[2], a[3] - o[3])

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a = self.c
        return Cyclotomic.make(o[0] - a[0], o[1] - a[1], o[2] - a[2], o[3] - a[3])

    def __mul__(self, other):
        if isinstance(other, Cyclotomic):
            a, b = self.c, other.c
            p = [ZERO] * 7
            for i in range(4):
                ai = a[i]
                if ai:
                    for j in range(4):
                        if b[j]:
                            p[i + j] += ai * b[j]
            # z^4 = z^2 - 1, z^5 = z^3 - z, z^6 = -1
            return Cyclotomic.make(p[0] - p[4] - p[6], p[1] - p[5], p[2] + p[4], p[3] + p[5])
        if isinstance(other, int) or type(other) is type(ZERO):
            if not other:
                return ZERO
            a = self.c
            return Cyclotomic.make(a[0] * other, a[1] * other, a[2] * other, a[3] * other)
        return NotImplemented

    __rmul__ = __mul__

    def _matrix(self):
        # columns: self * z^j
        cols = []
        x = self
        for _ in range(4):
            cols.append(x.c if isinstance(x, Cyclotomic) else (x, ZERO, ZERO, ZERO))
            x = x * ZETA
        return [[cols[j][i] for j in range(4)] for i in range(4)]

    def inverse(self):
        m = self._matrix()
        rhs = [ONE, ZERO, ZERO, ZERO]
        aug = [row[:] + [rhs[i]] for i, row in enumerate(m)]
        n = 4
        for col in range(n):
            piv = next((r for r in range(col, n) if aug[r][col]), None)
            if piv is None:
                raise DivisionByZero("division by zero in Q(zeta12)")
            aug[col], aug[piv] = aug[piv], aug[col]
            inv = 1 / aug[col][col]
            aug[col] = [v * inv for v in aug[col]]
            for r in range(n):
                if r != col and aug[r][col]:
                    f = aug[r][col]
                    aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
        return Cyclotomic.make(*(aug[i][n] for i in range(n)))

    def __truediv__(self, other):
        if isinstance(other, Cyclotomic):
            return self * other.inverse()
        if isinstance(other, int) or type(other) is type(ZERO):
            if not other:
                raise DivisionByZero("division by zero")
            return self * (1 / mpq(other))
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, int) or type(other) is type(ZERO):
            return self.inverse() * mpq(other)
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __bool__(self):
        return True  # demotion guarantees a nonzero zeta-part

    def __eq__(self, other):
        if isinstance(other, Cyclotomic):
            return self.c == other.c
        return False  # an mpq never equals a non-demoted Cyclotomic

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("cyc",) + self.c)
        return self._hash

    def __repr__(self):
        return f"Cyclotomic({format_scalar(self)})"


ZETA = Cyclotomic((0, 1, 0, 0))
ETA = Cyclotomic.make(mpq(-1), ZERO, ONE, ZERO)       # zeta^4
I = Cyclotomic.make(ZERO, ZERO, ZERO, ONE)           # zeta^3
SQRT3 = Cyclotomic.make(ZERO, mpq(2), ZERO, mpq(-1))  # zeta + zeta^11


def _is_const(x):
    return isinstance(x, (int, Cyclotomic)) or type(x) is type(ZERO)


# ---------------------------------------------------------------------------
# Univariate polynomials over constants
# ---------------------------------------------------------------------------

class Poly:
    """Dense polynomial, coefficients low degree first, no trailing zeros."""

    __slots__ = ("c",)

    def __init__(self, coeffs=()):
        c = list(coeffs)
        while c and not c[-1]:
            c.pop()
        self.c = tuple(c)

    @property
    def degree(self):
        return len(self.c) - 1

    def __bool__(self):
        return bool(self.c)

    def lead(self):
        return self.c[-1]

    def is_one(self):
        return len(self.c) == 1 and self.c[0] == 1 and type(self.c[0]) is type(ZERO)

    def __add__(self, other):
        a, b = self.c, other.c
        if len(a) < len(b):
            a, b = b, a
        return Poly([x + y for x, y in zip(a, b)] + list(a[len(b):]))

    def __neg__(self):
        return Poly([-x for x in self.c])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        a, b = self.c, other.c
        if not a or not b:
            return Poly()
        out = [ZERO] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] = out[i + j] + x * y
        return Poly(out)

    def scale(self, s):
        if not s:
            return Poly()
        return Poly([x * s for x in self.c])

    def divmod(self, other):
        if not other:
            raise DivisionByZero("polynomial division by zero")
        r = list(self.c)
        db = other.degree
        inv = 1 / other.lead() if _is_rational(other.lead()) else other.lead().inverse()
        q = [ZERO] * max(len(r) - db, 0)
        for i in range(len(r) - 1 - db, -1, -1):
            coef = r[i + db]
            if coef:
                t = coef * inv
                q[i] = t
                for j, y in enumerate(other.c):
                    if y:
                        r[i + j] = r[i + j] - t * y
        return Poly(q), Poly(r[:db] if db > 0 else [])

    def monic(self):
        ld = self.lead()
        if ld == 1 and _is_rational(ld):
            return self
        inv = 1 / ld if _is_rational(ld) else ld.inverse()
        return Poly([x * inv for x in self.c])

    def __call__(self, v):
        acc = ZERO
        for x in reversed(self.c):
            acc = acc * v + x
        return acc

    def __eq__(self, other):
        return isinstance(other, Poly) and self.c == other.c

    def __hash__(self):
        return hash(("poly",) + self.c)


def _is_rational(x):
    return type(x) is type(ZERO) or isinstance(x, int)


def poly_gcd(a: Poly, b: Poly) -> Poly:
    while b:
        a, b = b, a.divmod(b)[1]
    return a.monic() if a else a


_PONE = Poly([ONE])


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------

class RationalFunction:
    """num/den in one parameter; gcd(num, den) = 1 and den monic.

    Never constructed for constant values: :func:`_rf` demotes those.
    """

    __slots__ = ("num", "den", "var", "_hash")

    def __init__(self, num: Poly, den: Poly, var: str):
        self.num = num
        self.den = den
        self.var = var
        self._hash = None

    # construction ---------------------------------------------------------
    @staticmethod
    def variable(var: str) -> "RationalFunction":
        return RationalFunction(Poly([ZERO, ONE]), _PONE, var)

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            if other.var != self.var:
                raise TypeError(f"cannot mix parameters {self.var!r} and {other.var!r}")
            return other.num, other.den
        if _is_const(other):
            c = mpq(other) if isinstance(other, int) else other
            return Poly([c]), _PONE
        return None

    # arithmetic -----------------------------------------------------------
    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n2, d2 = o
        if self.den.is_one() and d2.is_one():
            return _rf(self.num + n2, _PONE, self.var, reduced=True)
        if self.den == d2:
            return _rf(self.num + n2, d2, self.var)
        return _rf(self.num * d2 + n2 * self.den, self.den * d2, self.var)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den, self.var)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + RationalFunction(-o[0], o[1], self.var)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n2, d2 = o
        if not n2:
            return ZERO
        if self.den.is_one() and d2.is_one():
            return _rf(self.num * n2, _PONE, self.var, reduced=True)
        if d2.is_one() and n2.degree == 0:
            return _rf(self.num.scale(n2.c[0]), self.den, self.var, reduced=True)
        return _rf(self.num * n2, self.den * d2, self.var)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n2, d2 = o
        if not n2:
            raise DivisionByZero("division by zero")
        if d2.is_one() and n2.degree == 0:
            c = n2.c[0]
            inv = 1 / c if _is_rational(c) else c.inverse()
            return _rf(self.num.scale(inv), self.den, self.var, reduced=True)
        return _rf(self.num * d2, self.den * n2, self.var)

    def __rtruediv__(self, other):
        if not _is_const(other):
            return NotImplemented
        c = mpq(other) if isinstance(other, int) else other
        return _rf(self.den.scale(c), self.num, self.var)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return (1 / self) ** (-n)
        result, base = ONE, self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __bool__(self):
        return True

    def __eq__(self, other):
        if isinstance(other, RationalFunction):
            return self.var == other.var and self.num == other.num and self.den == other.den
        return False

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.var, self.num, self.den))
        return self._hash

    def __repr__(self):
        return f"RationalFunction({format_scalar(self)})"


def _rf(num: Poly, den: Poly, var: str, reduced: bool = False):
    """Normalize num/den and demote to a constant when possible."""
    if not den:
        raise DivisionByZero("zero denominator")
    if not num:
        return ZERO
    if not reduced and den.degree > 0:
        g = poly_gcd(num, den)
        if g.degree > 0:
            num = num.divmod(g)[0]
            den = den.divmod(g)[0]
    ld = den.lead()
    if not (ld == 1 and _is_rational(ld)):
        inv = 1 / ld if _is_rational(ld) else ld.inverse()
        num = num.scale(inv)
        den = den.scale(inv)
    if den.degree == 0 and num.degree == 0:
        return num.c[0]
    return RationalFunction(num, den, var)


def parameter(var: str) -> RationalFunction:
    """The formal parameter itself, e.g. ``parameter('k')``."""
    return RationalFunction.variable(var)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def is_scalar(x) -> bool:
    return _is_const(x) or isinstance(x, RationalFunction)


def to_scalar(x):
    """Coerce int/str/Fraction-like input to a canonical scalar."""
    if isinstance(x, (Cyclotomic, RationalFunction)):
        return x
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, int) or type(x) is type(ZERO):
        return mpq(x)
    if hasattr(x, "numerator") and hasattr(x, "denominator"):
        return mpq(x.numerator, x.denominator)
    raise TypeError(f"cannot convert {x!r} to a scalar")


def param_of(x):
    """Parameter name of a scalar, or None for constants."""
    return x.var if isinstance(x, RationalFunction) else None


def evaluate_at(f, v):
    """Substitute the parameter by the rational ``v``; constants pass through."""
    if not isinstance(f, RationalFunction):
        return f
    v = to_scalar(v)
    d = f.den(v)
    if not d:
        raise PoleAtValue(f"denominator vanishes at {f.var}={format_scalar(v)}")
    n = f.num(v)
    return n / d if _is_rational(d) else n * d.inverse()


# ---------------------------------------------------------------------------
# text syntax
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\*\*|[-+*/^()]))")

_CONSTANTS = {"zeta": ZETA, "eta": ETA, "I": I, "sqrt3": SQRT3}


def _tokenize(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ScalarParseError(f"unexpected character at {pos} in {text!r}")
        pos = m.end()
        if m.group(1):
            out.append(("int", int(m.group(1))))
        elif m.group(2):
            out.append(("name", m.group(2)))
        else:
            op = m.group(3)
            out.append(("op", "^" if op == "**" else op))
    return out


class _ScalarParser:
    def __init__(self, tokens, names):
        self.toks = tokens
        self.i = 0
        self.names = names

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, op=None):
        tok = self.peek()
        if op is not None and tok != ("op", op):
            raise ScalarParseError(f"expected {op!r}, got {tok[1]!r}")
        self.i += 1
        return tok

    def expr(self):
        sign = 1
        if self.peek() in (("op", "-"), ("op", "+")):
            sign = -1 if self.take()[1] == "-" else 1
        val = self.term()
        if sign < 0:
            val = -val
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.power()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.power()
            if op == "*":
                val = val * rhs
            else:
                if not rhs:
                    raise DivisionByZero("division by zero in scalar literal")
                val = val / rhs
        return val

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            neg = False
            if self.peek() == ("op", "-"):
                self.take()
                neg = True
            kind, n = self.take()
            if kind != "int":
                raise ScalarParseError("exponent must be an integer")
            base = base ** (-n if neg else n)
        return base

    def atom(self):
        kind, val = self.take()
        if kind == "int":
            return mpq(val)
        if kind == "name":
            if val in self.names:
                return self.names[val]
            if val in _CONSTANTS:
                return _CONSTANTS[val]
            raise ScalarParseError(f"unknown symbol {val!r}")
        if val == "(":
            v = self.expr()
            self.take(")")
            return v
        if val == "-":
            return -self.power()
        raise ScalarParseError(f"unexpected token {val!r}")


def parse_scalar(text: str, names: dict | None = None):
    """Parse the textual scalar syntax (integers, a/b, zeta, eta, I, sqrt3, k, c,
    ``+ - * / ^`` and parentheses).

    ``names`` maps extra symbols to scalars. By default ``k`` and ``c`` denote
    the formal parameter of the same name.
    """
    if names is None:
        names = {"k": parameter("k"), "c": parameter("c")}
    p = _ScalarParser(_tokenize(text), names)
    val = p.expr()
    if p.i != len(p.toks):
        raise ScalarParseError(f"trailing input in {text!r}")
    return val


def _fmt_q(x):
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _fmt_const(x):
    """Constant as a sum string, e.g. '1/2 - 3*zeta^2'."""
    if not isinstance(x, Cyclotomic):
        return _fmt_q(mpq(x))
    parts = []
    for i, c in enumerate(x.c):
        if not c:
            continue
        mono = "" if i == 0 else ("zeta" if i == 1 else f"zeta^{i}")
        if i == 0:
            s = _fmt_q(abs(c))
        elif abs(c) == 1:
            s = mono
        else:
            s = f"{_fmt_q(abs(c))}*{mono}"
        parts.append(("-" if c < 0 else "+", s))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sgn, s in parts[1:]:
        out += f" {sgn} {s}"
    return out


def _fmt_poly(p: Poly, var: str):
    parts = []
    for i in range(len(p.c) - 1, -1, -1):
        c = p.c[i]
        if not c:
            continue
        mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
        if isinstance(c, Cyclotomic):
            s = f"({_fmt_const(c)})" + (f"*{mono}" if mono else "")
            sgn = "+"
        else:
            sgn = "-" if c < 0 else "+"
            a = abs(c)
            if mono and a == 1:
                s = mono
            elif mono:
                s = f"{_fmt_q(a)}*{mono}"
            else:
                s = _fmt_q(a)
        parts.append((sgn, s))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sgn, s in parts[1:]:
        out += f" {sgn} {s}"
    return out


def format_scalar(x) -> str:
    """Render in the textual scalar syntax; ``parse_scalar`` inverts it."""
    if isinstance(x, RationalFunction):
        num = _fmt_poly(x.num, x.var)
        if x.den.is_one():
            return num
        return f"({num})/({_fmt_poly(x.den, x.var)})"
    return _fmt_const(x)


def is_simple_scalar(x) -> bool:
    """True when ``format_scalar`` yields a single signed rational."""
    return _is_rational(x)


def scalar_sum(values):
    return reduce(lambda a, b: a + b, values, ZERO)
