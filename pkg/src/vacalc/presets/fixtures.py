"""JSON fixture files holding long tables and displays.

A fixture file looks like::

    {"parameter": "k",
     "opes": [{"a": "E", "b": "F", "poles": ["...", ...], "tags": [...]}],
     "errata": [{"a": "E", "b": "E", "pole": 0, "verbatim": "...",
                 "corrected": "...", "tag": "..."}],
     "states": {"name": "element string"},
     "displays": {"name": {"lhs": "...", "terms": [{"tag", "coeff", "expr"}],
                           "sha256": "..."}}}

Pole lists are indexed by n for ``a_(n) b``.  Every display carries a
sha256 of its term list so that accidental edits are caught on load.
Displays double as named states (the sum of their terms).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from functools import lru_cache
from importlib import resources

__all__ = ["Display", "Term", "FixtureError", "load_raw", "load_table", "load_states",
           "load_display", "display_names", "term_digest", "fixture_path"]


class FixtureError(ValueError):
    pass


@dataclass(frozen=True)
class Term:
    tag: str
    coeff: str
    expr: str

    def source(self) -> str:
        return f"({self.coeff})*({self.expr})"


@dataclass(frozen=True)
class Display:
    """A transcribed identity ``lhs = sum coeff_i * expr_i``."""

    name: str
    terms: tuple
    lhs: str | None = None
    sha256: str | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def rhs_source(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(t.source() for t in self.terms)

    def perturbed(self, index: int, delta="1") -> "Display":
        """Copy with the coefficient of term ``index`` increased by ``delta``."""
        terms = list(self.terms)
        t = terms[index]
        terms[index] = replace(t, coeff=f"({t.coeff}) + ({delta})")
        return replace(self, terms=tuple(terms), sha256=None)


def term_digest(terms) -> str:
    payload = json.dumps([[t["tag"], t["coeff"], t["expr"]] for t in terms],
                         separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def fixture_path(name: str):
    return resources.files(__package__).joinpath("data", f"{name}.json")


@lru_cache(maxsize=None)
def load_raw(name: str) -> dict:
    path = fixture_path(name)
    if not path.is_file():
        return {}
    data = json.loads(path.read_text())
    for dname, d in data.get("displays", {}).items():
        want = d.get("sha256")
        got = term_digest(d["terms"])
        if want is not None and want != got:
            raise FixtureError(f"{name}:{dname} checksum mismatch ({got[:12]} != {want[:12]})")
    return data


def display_names(name: str):
    return list(load_raw(name).get("displays", {}))


def load_display(name: str, display: str, apply_errata: bool = True) -> Display:
    """A display as transcribed, with its recorded corrections applied by default.

    Corrections live next to the display as ``errata: [{index, field,
    verbatim, corrected, note}]`` and are checked against the transcription.
    An entry ``{action: "add", term: {tag, coeff, expr}}`` supplies a missing term.
    """
    d = load_raw(name).get("displays", {}).get(display)
    if d is None:
        raise KeyError(f"no display {display!r} in fixture {name!r}")
    terms = [Term(t["tag"], t["coeff"], t["expr"]) for t in d["terms"]]
    if apply_errata:
        for e in d.get("errata", []):
            if e.get("action") == "add":
                terms.append(Term(**e["term"]))
                continue
            t = terms[e["index"]]
            if getattr(t, e["field"]) != e["verbatim"]:
                raise FixtureError(f"erratum for {display}[{e['index']}] does not match")
            terms[e["index"]] = replace(t, **{e["field"]: e["corrected"]})
    meta = {k: v for k, v in d.items() if k not in ("terms", "lhs", "sha256")}
    return Display(display, tuple(terms), d.get("lhs"), d.get("sha256"), meta)


def load_states(name: str, apply_errata: bool = True) -> dict:
    """Named states: explicit ``states`` plus one per display (its right side).

    ``state_errata: [{name, verbatim, corrected, note}]`` replace transcribed
    states unless ``apply_errata`` is false.
    """
    data = load_raw(name)
    out = dict(data.get("states", {}))
    if apply_errata:
        for e in data.get("state_errata", []):
            if out.get(e["name"]) != e["verbatim"]:
                raise FixtureError(f"state erratum for {e['name']} does not match")
            out[e["name"]] = e["corrected"]
    for dname in data.get("displays", {}):
        out.setdefault(dname, load_display(name, dname, apply_errata).rhs_source())
    return out


def load_table(name: str, apply_errata: bool = True) -> dict:
    data = load_raw(name)
    if not data:
        raise FixtureError(f"missing fixture {name!r}")
    opes = {}
    for o in data.get("opes", []):
        opes[(o["a"], o["b"])] = list(o["poles"])
    if apply_errata:
        for e in data.get("errata", []):
            poles = opes[(e["a"], e["b"])]
            if poles[e["pole"]] != e["verbatim"]:
                raise FixtureError(f"erratum {e.get('tag')} does not match the table")
            poles[e["pole"]] = e["corrected"]
    return {"opes": opes, "states": load_states(name, apply_errata), "errata": data.get("errata", [])}
