"""Truncated q-series and vacuum characters of freely generated algebras.

Coefficients are kept as rationals so that the averaging in the symmetric
cube formula stays exact; integrality is checked separately.
"""

from __future__ import annotations

import re
from collections import Counter
from itertools import permutations

from .coeff import mpq

__all__ = [
    "QSeries", "EQUAL", "free_character", "sym_cube_character", "compare",
    "parse_series", "parse_product", "brute_force_sym_cube", "partitions_min",
    "product_string", "weights_of_product",
    "SeriesParseError",
]


class SeriesParseError(ValueError):
    pass


class _Equal:
    def __repr__(self):
        return "Equal"


EQUAL = _Equal()


class QSeries:
    """c_0 + c_1 q + ... + c_N q^N  (mod q^(N+1))."""

    __slots__ = ("N", "coeffs")

    def __init__(self, coeffs, N: int | None = None):
        cs = [mpq(c) for c in coeffs]
        if N is None:
            N = len(cs) - 1
        cs = (cs + [mpq(0)] * (N + 1))[:N + 1]
        self.N = N
        self.coeffs = tuple(cs)

    @classmethod
    def one(cls, N):
        return cls([1], N)

    def __getitem__(self, n):
        return self.coeffs[n] if 0 <= n <= self.N else mpq(0)

    def _common(self, other):
        if not isinstance(other, QSeries):
            other = QSeries([other], self.N)
        return min(self.N, other.N), other

    def __add__(self, other):
        N, other = self._common(other)
        return QSeries([self[n] + other[n] for n in range(N + 1)], N)

    __radd__ = __add__

    def __neg__(self):
        return QSeries([-c for c in self.coeffs], self.N)

    def __sub__(self, other):
        return self + (-other if isinstance(other, QSeries) else -mpq(other))

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            s = mpq(other)
            return QSeries([c * s for c in self.coeffs], self.N)
        N = min(self.N, other.N)
        out = [mpq(0)] * (N + 1)
        for i in range(N + 1):
            a = self.coeffs[i]
            if not a:
                continue
            for j in range(N + 1 - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] += a * b
        return QSeries(out, N)

    __rmul__ = __mul__

    def inverse(self):
        if not self.coeffs[0]:
            raise ZeroDivisionError("constant term is zero")
        inv0 = 1 / self.coeffs[0]
        out = [inv0]
        for n in range(1, self.N + 1):
            s = sum((self.coeffs[k] * out[n - k] for k in range(1, n + 1)), mpq(0))
            out.append(-s * inv0)
        return QSeries(out, self.N)

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.inverse()
        return self * (1 / mpq(other))

    def __pow__(self, k: int):
        out = QSeries.one(self.N)
        for _ in range(k):
            out = out * self
        return out

    def at_power(self, k: int, N: int | None = None):
        """f(q^k), truncated at N (default: the same order)."""
        N = self.N if N is None else N
        out = [mpq(0)] * (N + 1)
        for n, c in enumerate(self.coeffs):
            if n * k > N:
                break
            out[n * k] = c
        return QSeries(out, N)

    def truncate(self, N):
        if N > self.N:
            raise ValueError("cannot extend a truncated series")
        return QSeries(self.coeffs[:N + 1], N)

    def is_integral(self) -> bool:
        return all(c.denominator == 1 for c in self.coeffs)

    def integers(self):
        if not self.is_integral():
            raise ValueError("non-integral coefficients")
        return [int(c) for c in self.coeffs]

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        return self.N == other.N and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.N, self.coeffs))

    def __repr__(self):
        return f"QSeries({self.format()}, N={self.N})"

    def format(self) -> str:
        parts = []
        for n, c in enumerate(self.coeffs):
            if not c:
                continue
            mag = abs(c)
            if n == 0:
                body = str(mag)
            else:
                qn = "q" if n == 1 else f"q^{n}"
                body = qn if mag == 1 else f"{mag}{qn}" if mag.denominator == 1 else f"({mag}){qn}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(f" {'+' if c > 0 else '-'} {body}")
        return "".join(parts) or "0"


# ----------------------------------------------------------------------
# constructors
# ----------------------------------------------------------------------

def _pochhammer_inverse(a: int, N: int, power: int = 1) -> QSeries:
    """1 / (q^a; q)_inf^power truncated at N."""
    out = QSeries.one(N)
    for n in range(max(a, 1), N + 1):
        # multiply by 1/(1-q^n) = 1 + q^n + q^2n + ...
        for _ in range(power):
            cs = list(out.coeffs)
            for i in range(n, N + 1):
                cs[i] += cs[i - n]
            out = QSeries(cs, N)
    return out


def free_character(weights, N: int) -> QSeries:
    """prod over generator weights w of prod_{n >= w} 1/(1 - q^n)."""
    out = QSeries.one(N)
    for w, k in sorted(Counter(weights).items()):
        if w < 1:
            raise ValueError("generator weights must be >= 1")
        out = out * _pochhammer_inverse(w, N, k)
    return out


def sym_cube_character(f: QSeries) -> QSeries:
    """(f(q)^3 + 3 f(q) f(q^2) + 2 f(q^3)) / 6."""
    return (f ** 3 + 3 * f * f.at_power(2) + 2 * f.at_power(3)) * mpq(1, 6)


def compare(a: QSeries, b: QSeries):
    """Smallest n with a_n != b_n within the common truncation, else EQUAL."""
    N = min(a.N, b.N)
    for n in range(N + 1):
        if a[n] != b[n]:
            return n
    return EQUAL


# ----------------------------------------------------------------------
# brute force: S3-orbits of monomials in the tensor cube
# ----------------------------------------------------------------------

def partitions_min(n: int, smallest: int, largest: int | None = None):
    """Partitions of n into parts >= smallest, parts nonincreasing."""
    if n == 0:
        yield ()
        return
    largest = n if largest is None else min(largest, n)
    for k in range(largest, smallest - 1, -1):
        for rest in partitions_min(n - k, smallest, k):
            yield (k,) + rest


def brute_force_sym_cube(gen_weight: int, N: int) -> list:
    """Number of S3-orbits of monomials in three copies of one free generator.

    A monomial is a triple of partitions (one per copy, parts >= gen_weight);
    orbits are counted by enumerating triples and canonicalizing under all
    permutations of the copies.
    """
    parts = {n: list(partitions_min(n, gen_weight)) for n in range(N + 1)}
    counts = []
    for n in range(N + 1):
        seen = set()
        for n1 in range(n + 1):
            for n2 in range(n - n1 + 1):
                n3 = n - n1 - n2
                for p1 in parts[n1]:
                    for p2 in parts[n2]:
                        for p3 in parts[n3]:
                            seen.add(min(permutations((p1, p2, p3))))
        counts.append(len(seen))
    return counts


# ----------------------------------------------------------------------
# text formats
# ----------------------------------------------------------------------

_TERM = re.compile(r"^\s*([+-])?\s*(?:\(?\s*(\d+(?:/\d+)?)\s*\)?\s*\*?\s*)?(q(?:\s*\^\s*(\d+))?)?\s*$")


def parse_series(text: str, N: int | None = None) -> QSeries:
    """``1 + q^2 + 2q^4 - 3*q^5`` -> QSeries (truncated at N or the top degree)."""
    body = text.replace(" ", "")
    chunks = re.findall(r"[+-]?[^+-]+", body)
    if "".join(chunks) != body:
        raise SeriesParseError(f"stray sign in {text!r}")
    if not chunks:
        raise SeriesParseError("empty series")
    coeffs = {}
    for ch in chunks:
        m = _TERM.match(ch)
        if not m or (m[2] is None and m[3] is None):
            raise SeriesParseError(f"bad term {ch!r}")
        c = mpq(m[2]) if m[2] else mpq(1)
        if m[1] == "-":
            c = -c
        e = 0 if m[3] is None else (int(m[4]) if m[4] else 1)
        coeffs[e] = coeffs.get(e, mpq(0)) + c
    top = max(coeffs)
    N = top if N is None else N
    return QSeries([coeffs.get(n, 0) for n in range(N + 1)], N)


_POCH = re.compile(r"\(\s*q(?:\s*\^\s*(\d+))?\s*;\s*q\s*\)(?:_\{?inf(?:ty)?\}?)?(?:\s*\^\s*(\d+))?")


def parse_product(text: str, N: int) -> QSeries:
    """``prod (q^2;q) (q^4;q) (q^6;q)^2 ...`` read as 1 / prod of the factors."""
    body = text.strip()
    if body.startswith("prod"):
        body = body[4:]
    found = list(_POCH.finditer(body))
    rest = _POCH.sub("", body).strip()
    if not found or rest:
        raise SeriesParseError(f"cannot parse product {text!r}")
    weights = []
    for m in found:
        a = int(m[1]) if m[1] else 1
        k = int(m[2]) if m[2] else 1
        weights += [a] * k
    return free_character(weights, N)


def weights_of_product(text: str) -> list:
    body = text.strip()[4:] if text.strip().startswith("prod") else text
    out = []
    for m in _POCH.finditer(body):
        out += [int(m[1]) if m[1] else 1] * (int(m[2]) if m[2] else 1)
    return out


def product_string(weights) -> str:
    items = sorted(Counter(weights).items())
    return "prod " + " ".join(f"(q^{w};q)" + (f"^{k}" if k > 1 else "") for w, k in items)

