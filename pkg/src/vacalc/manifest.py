"""Verification manifests: JSON lists of self-contained checks.

A manifest looks like::

    {"name": "core",
     "defaults": {"preset": "vinfty3"},
     "checks": [
        {"id": "ope.T0T0", "kind": "ope-identity",
         "inputs": {"a": "T0", "n": 3, "b": "T0"}, "expected": "one"},
        ...]}

Every check returns a :class:`CheckResult`; failures carry the residual in
the element grammar.  Kinds:

``ope-identity``
    ``a_(n) b`` (or ``lhs``) minus ``expected`` must canonicalize to 0.
    ``perturb: {fixture, display, index, delta}`` (any kind) replaces
    ``@display`` by a copy with one coefficient shifted; when the display is
    also a state of the preset, the algebra is rebuilt with it replaced.
``skew`` / ``commutator``
    engine consistency checks; ``m`` and ``n`` may be lists.
``singular``
    ``expected`` is a boolean; ``L`` defaults to ``Ltot`` or the generator L.
``decouple``
    express ``target`` over the spanning set of ``gens`` (``maxdeg``);
    ``expected`` is ``"ok"``, ``"not-in-span"`` or ``{label: coeff}``.
    ``method: "cubic-R2"`` solves for a cubic generator over R2 relations
    and compares the listed coefficients.
``character``
    ``sym3_of`` weights vs ``weights``; ``expected``:
    ``{"first_difference": n}`` or ``"equal"``.
``ideal``, ``primary``, ``coupling``, ``determinant``
    see :mod:`vacalc.reduction`.
"""

from __future__ import annotations

import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from itertools import product

from . import characters as ch
from . import reduction as red
from .coeff import format_scalar, mpq, to_scalar
from .engine import commutator_check, is_singular, skew_check
from .presets import PRESET_FIXTURE, fixtures, get_preset
from .terms import Element

__all__ = ["ManifestError", "CheckResult", "load_manifest", "run_check", "run_manifest", "KINDS"]

KINDS = ("ope-identity", "skew", "commutator", "singular", "decouple", "character",
         "ideal", "primary", "coupling", "determinant")


class ManifestError(ValueError):
    pass


@dataclass
class CheckResult:
    id: str
    kind: str
    ok: bool
    detail: str = ""
    residual: str | None = None
    seconds: float = 0.0
    # display tag -> coefficient correction (or residual term -> tags)
    blame: dict | None = None

    def to_json(self):
        return asdict(self)


def bundled_manifests() -> list:
    return sorted((Path(__file__).parent / "manifests").glob("*.json"))


def load_manifest(path) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as e:
        raise ManifestError(f"cannot read manifest {path}: {e}") from e
    return validate_manifest(data)


def validate_manifest(data: dict) -> dict:
    checks = data.get("checks") if isinstance(data, dict) else None
    if not isinstance(checks, list):
        raise ManifestError("manifest needs a 'checks' list")
    seen = set()
    for c in checks:
        if "id" not in c or "kind" not in c:
            raise ManifestError(f"check without id/kind: {c}")
        if c["id"] in seen:
            raise ManifestError(f"duplicate check id {c['id']!r}")
        if c["kind"] not in KINDS:
            raise ManifestError(f"unknown kind {c['kind']!r} in {c['id']}")
        seen.add(c["id"])
    return data


# ----------------------------------------------------------------------
# helpers
# ----------------------------------------------------------------------

def _algebra(inp):
    p = inp.get("perturb")
    if p and PRESET_FIXTURE.get(inp["preset"]) == p["fixture"]:
        # the display is also a state of the preset: rebuild with it replaced
        src = _display_subst(inp)[p["display"]]
        return get_preset(inp["preset"], inp.get("param"), overrides={p["display"]: src})
    return get_preset(inp["preset"], inp.get("param"))


def _rename(src, mapping):
    if not mapping:
        return src
    pat = re.compile(r"\b(" + "|".join(map(re.escape, mapping)) + r")\b")
    return pat.sub(lambda m: f"({mapping[m[1]]})", src)


def _display_terms(inp):
    """``{display: [(tag, source), ...]}`` for displays a check rewrites.

    ``perturb: {fixture, display, index, delta}`` shifts one coefficient;
    ``rename: {fixture, displays, map}`` reads displays written with other
    symbol names (``map`` sends a display symbol to a preset expression).
    """
    out = {}
    p = inp.get("perturb")
    if p:
        d = fixtures.load_display(p["fixture"], p["display"])
        d = d.perturbed(int(p["index"]), str(p.get("delta", "1")))
        out[p["display"]] = [(t.tag, t.source()) for t in d.terms]
    r = inp.get("rename")
    if r:
        for name in r["displays"]:
            terms = out.get(name) or [(t.tag, t.source())
                                      for t in fixtures.load_display(r["fixture"], name).terms]
            out[name] = [(tag, _rename(src, r["map"])) for tag, src in terms]
    return out


def _display_subst(inp):
    return {name: " + ".join(src for _, src in terms) or "0"
            for name, terms in _display_terms(inp).items()}


def _term_parts(src):
    # "(coeff)*(expr)" -> expr
    return src[src.index(")*(") + 3:-1] if ")*(" in src else src


def _blame(A, res, inp, lhs_texts, rhs_texts):
    """Per-tag account of a nonzero residual against the displays it involves.

    If the residual is a combination of display terms, the result maps each
    tag to the change of its coefficient that removes the residual.
    Otherwise it maps residual terms to the tags whose expansions contain them.
    """
    def refs(texts):
        return set(re.findall(r"@(\w+)", " ".join(t for t in texts if isinstance(t, str))))
    sides = {name: 1 for name in refs(rhs_texts)}
    sides.update({name: -1 for name in refs(lhs_texts) if name not in sides})
    if not sides or not res:
        return None
    own = _display_terms(inp)
    fx = PRESET_FIXTURE.get(inp.get("preset"))
    cols, tags = [], []
    for name in sorted(sides):
        if name in own:
            terms = own[name]
        elif fx and name in fixtures.display_names(fx):
            terms = [(t.tag, t.source()) for t in fixtures.load_display(fx, name).terms]
        else:
            continue
        for tag, src in terms:
            cols.append(A.parse(_term_parts(src)) * sides[name])
            tags.append(tag)
    if not cols:
        return None
    coeffs, left = red.solve(cols, res)
    if not left:
        return {tag: "coefficient off by " + format_scalar(-c) for tag, c in zip(tags, coeffs) if c}
    resid = dict(res.items())
    out = {}
    for tag, col in zip(tags, cols):
        for mono, _ in col.items():
            if mono in resid:
                out.setdefault(A.format(Element({mono: resid[mono]})), []).append(tag)
    return {k: ", ".join(v) for k, v in out.items()}


def _elem(A, text, inp=None):
    if not isinstance(text, str):
        raise ManifestError(f"expected an element string, got {text!r}")
    for name, src in _display_subst(inp or {}).items():
        text = text.replace("@" + name, f"({src})")
    return A.parse(text)


def _default_L(A, inp):
    if "L" in inp:
        return A.parse(inp["L"])
    st = A.state("Ltot", missing_ok=True)
    return st if st is not None else A.gen("L")


def _fail(cid, kind, detail, A=None, res=None):
    return CheckResult(cid, kind, False, detail, None if res is None else A.format(res))


# ----------------------------------------------------------------------
# check kinds
# ----------------------------------------------------------------------

def _ope_identity(cid, inp, expected):
    A = _algebra(inp)
    if "n" in inp:
        lhs = A.nth_product(_elem(A, inp["a"], inp), int(inp["n"]), _elem(A, inp["b"], inp))
    else:
        lhs = _elem(A, inp["lhs"], inp)
    rhs = _elem(A, expected if expected is not None else "0", inp)
    res = lhs - rhs
    if res:
        out = _fail(cid, "ope-identity", f"residual has {len(res)} terms", A, res)
        out.blame = _blame(A, res, inp, [inp.get("lhs"), inp.get("a"), inp.get("b")], [expected])
        return out
    return CheckResult(cid, "ope-identity", True, "residual 0")


def _skew(cid, inp, expected):
    A = _algebra(inp)
    rep = skew_check(A, _elem(A, inp["a"], inp), _elem(A, inp["b"], inp), inp.get("nmax"))
    bad = rep.failures()
    ok = (not bad) == bool(True if expected is None else expected)
    if bad:
        n = min(bad)
        return CheckResult(cid, "skew", ok, f"failing n: {sorted(bad)}", A.format(bad[n]))
    return CheckResult(cid, "skew", ok, f"{len(rep.residuals)} products agree")


def _as_list(v):
    return v if isinstance(v, list) else [v]


def _commutator(cid, inp, expected):
    A = _algebra(inp)
    a, b, v = (_elem(A, inp[k], inp) for k in ("a", "b", "v"))
    bad = {}
    count = 0
    for m, n in product(_as_list(inp["m"]), _as_list(inp["n"])):
        rep = commutator_check(A, a, int(m), b, int(n), v)
        count += 1
        bad.update(rep.failures())
    ok = (not bad) == bool(True if expected is None else expected)
    if bad:
        k = min(bad)
        return CheckResult(cid, "commutator", ok, f"failing (m, n): {sorted(bad)}", A.format(bad[k]))
    return CheckResult(cid, "commutator", ok, f"{count} identities hold")


def _singular(cid, inp, expected):
    A = _algebra(inp)
    v = _elem(A, inp["vector"], inp)
    got, wit = is_singular(A, v, _default_L(A, inp))
    want = True if expected is None else bool(expected)
    detail = f"weight {A.weight(v)}" if got else f"failing modes {sorted(wit, key=str)}"
    res = None
    if not got and wit:
        first = wit[min(wit, key=str)]
        res = A.format(first) if hasattr(first, "items") else str(first)
    return CheckResult(cid, "singular", got == want, detail, res)


def _decouple(cid, inp, expected):
    A = _algebra(inp)
    if inp.get("method") == "cubic-R2":
        tuples = [tuple(t) for t in inp.get("tuples", red.R2_TUPLES_C16)]
        b = red.solve_cubic(A, tuple(inp["target"]), tuples)
        # expected keys are 1-based: "b1", "b2", ...
        got = {f"b{i + 1}": x for i, x in enumerate(b)}
        bad = {k: format_scalar(got[k]) for k, c in (expected or {}).items() if got[k] != to_scalar(c)}
        detail = "b = " + ", ".join(format_scalar(x) for x in b)
        return CheckResult(cid, "decouple", not bad, detail if not bad else f"mismatch {bad}")
    target = _elem(A, inp["target"], inp)
    try:
        rel = red.decouple(A, target, inp["gens"], int(inp.get("maxdeg", 3)),
                           maxder=inp.get("maxder"))
    except red.NotInSpan as e:
        ok = expected == "not-in-span"
        return CheckResult(cid, "decouple", ok, "not in span", A.format(e.residual))
    if expected == "not-in-span":
        return CheckResult(cid, "decouple", False, "unexpectedly in span")
    if isinstance(expected, dict):
        got = {lab: c for c, lab, _ in rel.terms}
        bad = {k: format_scalar(got.get(k, mpq(0))) for k, v in expected.items()
               if got.get(k, mpq(0)) != to_scalar(v)}
        if bad:
            return CheckResult(cid, "decouple", False, f"coefficient mismatch {bad}")
    return CheckResult(cid, "decouple", True, f"{len(rel.terms)} terms")


def _character(cid, inp, expected):
    N = int(inp["truncate"])
    if "sym3_of" in inp:
        a = ch.sym_cube_character(ch.free_character(inp["sym3_of"], N))
    else:
        a = ch.parse_series(inp["series"], N)
    b = ch.parse_product(inp["product"], N) if "product" in inp else ch.free_character(inp["weights"], N)
    d = ch.compare(a, b)
    if isinstance(expected, dict):
        ok = d == expected.get("first_difference")
    else:
        ok = d is ch.EQUAL
    detail = "equal through q^%d" % N if d is ch.EQUAL else f"first difference at q^{d}: {a[d]} vs {b[d]}"
    return CheckResult(cid, "character", ok, detail)


def _ideal(cid, inp, expected):
    A = _algebra(inp)
    if "n" in inp:
        x = A.nth_product(_elem(A, inp["a"], inp), int(inp["n"]), _elem(A, inp["b"], inp))
    else:
        x = _elem(A, inp["x"], inp)
    gens = [_elem(A, g, inp) for g in inp["ideal"]]
    if not x:
        return CheckResult(cid, "ideal", expected is not False, "zero element")
    ok, wit = red.ideal_membership(A, x, gens, inp.get("weight"))
    want = True if expected is None else bool(expected)
    return CheckResult(cid, "ideal", ok == want, "member" if ok else "not a member",
                       None if ok else A.format(wit))


def _primary(cid, inp, expected):
    A = _algebra(inp)
    got = red.primary_correction(A, _elem(A, inp["x"], inp), _default_L(A, inp))
    res = got - _elem(A, expected, inp)
    if res:
        return _fail(cid, "primary", "correction differs", A, res)
    return CheckResult(cid, "primary", True, A.format(got))


def _coupling(cid, inp, expected):
    try:
        lam, mu = red.match_coupling(verbatim=bool(inp.get("verbatim", False)))
    except red.NoSolution as e:
        return CheckResult(cid, "coupling", expected == "no-solution", f"no solution: {e}")
    detail = f"lambda = {format_scalar(lam)}, mu = {format_scalar(mu)}"
    ok = isinstance(expected, list) and [lam, mu] == [to_scalar(x) for x in expected]
    return CheckResult(cid, "coupling", ok, detail)


def _determinant(cid, inp, expected):
    d = red.determinant(inp["rows"])
    if expected == "nonzero":
        ok = bool(d)
    else:
        ok = d == to_scalar(expected)
    return CheckResult(cid, "determinant", ok, f"det = {format_scalar(d)}")


_RUNNERS = {
    "ope-identity": _ope_identity, "skew": _skew, "commutator": _commutator,
    "singular": _singular, "decouple": _decouple, "character": _character,
    "ideal": _ideal, "primary": _primary, "coupling": _coupling,
    "determinant": _determinant,
}


def run_check(check: dict, defaults: dict | None = None) -> CheckResult:
    inp = dict(defaults or {})
    inp.update(check.get("inputs", {}))
    t = time.perf_counter()
    try:
        res = _RUNNERS[check["kind"]](check["id"], inp, check.get("expected"))
    except ManifestError:
        raise
    except Exception as e:  # reported per check, never thrown
        res = CheckResult(check["id"], check["kind"], False, f"error: {type(e).__name__}: {e}")
    res.seconds = round(time.perf_counter() - t, 3)
    return res


def run_manifest(data_or_path, threads: int = 1, only=None) -> list:
    """Run all checks; results are ordered by check id."""
    if isinstance(data_or_path, dict):
        data = validate_manifest(data_or_path)
    else:
        data = load_manifest(data_or_path)
    defaults = data.get("defaults", {})
    checks = [c for c in data["checks"] if not only or c["id"] in only]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(lambda c: run_check(c, defaults), checks))
    else:
        results = [run_check(c, defaults) for c in checks]
    return sorted(results, key=lambda r: r.id)
