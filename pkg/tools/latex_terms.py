"""Turn a LaTeX sum of normally ordered products into fixture terms.

Dev helper used to produce the JSON fixtures; the package never imports it.
Usage from Python::

    terms = split_terms(r"\\frac{1}{2}\\nop{LL} - 3\\partial^2 L")
    # [('1/2', 'NO(L, L)'), ('-3', 'NO(d^2(L))')]
"""

from __future__ import annotations

import re

_CLEAN = [
    (r"\\\\", " "), (r"\\left", ""), (r"\\right", ""), (r"\\biggl", ""), (r"\\biggr", ""),
    (r"\\,", " "), (r"&", " "), (r"\n", " "), (r"\\mathbb\{1\}", r"\\one"),
    (r"\(w\)", ""),
]


def clean(tex: str) -> str:
    for a, b in _CLEAN:
        tex = re.sub(a, b, tex)
    return re.sub(r"\s+", " ", tex).strip()


def _match_brace(s, i, open_="{", close="}"):
    depth = 0
    for j in range(i, len(s)):
        if s[j] == open_:
            depth += 1
        elif s[j] == close:
            depth -= 1
            if depth == 0:
                return j
    raise ValueError(f"unbalanced at {i}: {s[i:i+40]}")


def split_top(s: str):
    """Split at top-level + and - (outside braces/parens), keeping signs."""
    parts, depth, cur = [], 0, ""
    for ch in s:
        if ch in "({[":
            depth += 1
        elif ch in ")}]":
            depth -= 1
        if ch in "+-" and depth == 0 and cur.strip():
            parts.append(cur)
            cur = ch
        else:
            cur += ch
    if cur.strip():
        parts.append(cur)
    return [p.strip() for p in parts]


def scalar(tex: str) -> str:
    """LaTeX coefficient -> scalar grammar with explicit '*'."""
    s = tex
    while "\\frac" in s:
        i = s.index("\\frac")
        a0 = s.index("{", i)
        a1 = _match_brace(s, a0)
        b0 = a1 + 1
        b1 = _match_brace(s, b0)
        num, den = s[a0 + 1:a1].strip(), s[b0 + 1:b1].strip()
        if num.isdigit() and den.isdigit():
            frac = f"({num}/{den})"
        else:
            frac = f"(({num})/({den}))"
        s = s[:i] + frac + s[b1 + 1:]
    s = re.sub(r"\^\{(\d+)\}", r"^\1", s)
    s = s.replace("\\sqrt{3}", "sqrt3").replace("{", "(").replace("}", ")")
    s = s.replace(" i ", " I ").replace(" i)", " I)")
    s = re.sub(r"\s+", " ", s).strip()
    # implicit products
    s = re.sub(r"(\d)\s+(?=[\d(a-zA-Z])", r"\1*", s)
    s = re.sub(r"(\d)(?=[a-zA-Z(])", r"\1*", s)
    s = re.sub(r"\)\s*(?=[\d(a-zA-Z])", r")*", s)
    s = re.sub(r"([a-zA-Z0-9])\s+(?=[(a-zA-Z])", r"\1*", s)
    s = re.sub(r"\bk\s*\(", "k*(", s)
    s = s.replace(" ", "")
    if s in ("", "+"):
        return "1"
    if s == "-":
        return "-1"
    if s[-1] in "+-":
        s += "1"
    if s.startswith("+"):
        s = s[1:]
    return s


_FACTOR = re.compile(
    r"\s*,?\s*(\()?\s*(?:\\partial(?:\^\{?(\d+)\}?)?\s*)?"
    r"([A-Z](?:_\{[\d,]+\}|_\d)?)\s*(\))?\s*(\^2)?")


def gen_name(tok: str, namemap=None) -> str:
    tok = tok.replace(" ", "")
    m = re.fullmatch(r"([A-Z])_\{([\d,]+)\}", tok)
    if m:
        name = m[1] + "_" + m[2].replace(",", "_")
    else:
        name = tok.replace("_", "")
    return (namemap or {}).get(name, name)


def factors(body: str, namemap=None):
    out, pos = [], 0
    body = body.strip()
    while pos < len(body):
        m = _FACTOR.match(body, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse factor at {body[pos:pos+30]!r} in {body!r}")
        d = int(m[2]) if m[2] else (1 if "\\partial" in m[0] else 0)
        name = gen_name(m[3], namemap)
        f = name if d == 0 else f"d^{d}({name})"
        out.append(f)
        if m[5]:
            out.append(f)
        pos = m.end()
    return out


def field(tex: str, namemap=None):
    """Parse the field part of a term (a nop, a derivative or the vacuum)."""
    tex = tex.strip()
    if tex == "\\one":
        return "one"
    if tex.startswith("\\nop{"):
        inner = tex[5:_match_brace(tex, 4)]
        return "NO(" + ", ".join(factors(inner, namemap)) + ")"
    fs = factors(tex, namemap)
    if len(fs) != 1:
        raise ValueError(f"bad field {tex!r}")
    return f"NO({fs[0]})"


_FIELD_AT_END = re.compile(
    r"(\\nop\{.*\}|\\one|\(?\\partial(?:\^\{?\d+\}?)?\s*[A-Z](?:_\{[\d,]+\}|_\d)?\)?"
    r"|(?<![\\a-z])[A-Z](?:_\{[\d,]+\}|_\d)?)\s*$")


def split_term(term: str, namemap=None):
    """'-\\frac{a}{b}\\nop{..}' -> (scalar string, element string)."""
    t = term.strip()
    m = _FIELD_AT_END.search(t)
    if not m:
        raise ValueError(f"no field in term {t!r}")
    ftex = m[1]
    if ftex.startswith("\\nop"):
        # the nop may be followed by nothing; make sure braces close at the end
        i = t.rindex("\\nop{")
        ftex = t[i:]
        coeff = t[:i]
    else:
        coeff = t[:m.start(1)]
        ftex = ftex.strip("()") if ftex.startswith("(\\partial") else ftex
    return scalar(coeff), field(ftex, namemap)


def split_terms(tex: str, namemap=None):
    return [split_term(p, namemap) for p in split_top(clean(tex))]
