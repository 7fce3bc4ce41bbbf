"""``va``: command-line front end.

Exit codes: 0 success, 1 a computation or check failed, 2 usage error
(bad options, unparsable expressions, unknown presets, bad manifests).
"""

from __future__ import annotations

import json
import pickle
import sys
from pathlib import Path

import click

from . import characters as ch
from . import reduction as red
from .coeff import format_scalar
from .engine import skew_check, commutator_check, is_singular
from .manifest import ManifestError, bundled_manifests, run_manifest
from .presets import PRESETS, UnknownPreset, get_preset
from .terms import ElementParseError


class Ctx:
    def __init__(self, threads, cache, fmt):
        self.threads = threads
        self.cache = cache
        self.fmt = fmt
        self.used = []

    def algebra(self, preset, param):
        try:
            A = get_preset(preset, param)
        except UnknownPreset:
            raise click.UsageError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        except (ValueError, ArithmeticError) as e:
            raise click.UsageError(f"cannot build {preset} at {param}: {e}")
        if A not in self.used:
            self.used.append(A)
            self._load(A)
        return A

    def _cache_file(self, A):
        return Path(self.cache) / f"{A.name}-{A.fingerprint()}.pkl"

    def _load(self, A):
        if not self.cache:
            return
        f = self._cache_file(A)
        if f.is_file():
            try:
                A.import_cache(pickle.loads(f.read_bytes()))
            except Exception:  # a stale or foreign cache is ignored
                pass

    def save(self):
        if not self.cache:
            return
        Path(self.cache).mkdir(parents=True, exist_ok=True)
        for A in self.used:
            self._cache_file(A).write_bytes(pickle.dumps(A.export_cache()))

    def emit(self, payload: dict, text: str):
        if self.fmt == "json":
            click.echo(json.dumps(payload, indent=1))
        else:
            click.echo(text)


def _parse(A, text):
    try:
        return A.parse(text)
    except (ElementParseError, KeyError, ValueError) as e:
        raise click.UsageError(f"cannot parse {text!r}: {e}")


preset_opt = click.option("--preset", "-p", required=True, help="preset algebra name")
param_opt = click.option("--param", default=None, help="parameter value, e.g. 1/2 or -16/5")


@click.group()
@click.option("--threads", type=int, default=1, show_default=True, help="worker threads for manifests")
@click.option("--cache", type=click.Path(file_okay=False), envvar="VA_CACHE_DIR", default=None,
              help="directory for persisted product caches (default $VA_CACHE_DIR)")
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.pass_context
def main(ctx, threads, cache, fmt):
    """Vertex algebra OPE calculator and verification runner."""
    ctx.obj = Ctx(threads, cache, fmt)
    ctx.call_on_close(ctx.obj.save)


@main.command()
@preset_opt
@param_opt
@click.option("--a", "a", required=True)
@click.option("--b", "b", required=True)
@click.pass_obj
def ope(obj, preset, param, a, b):
    """Singular part of a(z) b(w): every nonzero pole."""
    A = obj.algebra(preset, param)
    poles = A.ope_singular(_parse(A, a), _parse(A, b))
    items = [(j + 1, A.format(p)) for j, p in enumerate(poles) if p]
    items.reverse()
    text = "\n".join(f"pole {j}: {s}" for j, s in items) or "regular (no poles)"
    obj.emit({"poles": {str(j): s for j, s in items}}, text)


@main.command()
@preset_opt
@param_opt
@click.option("-n", "n", type=int, required=True, help="product index")
@click.option("--a", "a", required=True)
@click.option("--b", "b", required=True)
@click.pass_obj
def nprod(obj, preset, param, n, a, b):
    """One n-th product a_(n) b."""
    A = obj.algebra(preset, param)
    s = A.format(A.nth_product(_parse(A, a), n, _parse(A, b)))
    obj.emit({"n": n, "product": s}, s)


@main.command()
@preset_opt
@param_opt
@click.option("--target", required=True)
@click.option("--gens", required=True, help="comma-separated state or generator names")
@click.option("--weight", type=int, default=None, help="expected weight of the target")
@click.option("--maxdeg", type=int, default=3, show_default=True)
@click.pass_obj
def reduce(obj, preset, param, target, gens, weight, maxdeg):
    """Express TARGET over normally ordered products of GENS."""
    A = obj.algebra(preset, param)
    x = _parse(A, target)
    names = [g.strip() for g in gens.split(",") if g.strip()]
    for g in names:
        if A.gen_index(g) is None and A.state(g, missing_ok=True) is None:
            raise click.UsageError(f"unknown generator or state {g!r}")
    w = A.weight(x)
    if weight is not None and w != weight:
        raise click.UsageError(f"target has weight {w}, not {weight}")
    try:
        rel = red.decouple(A, x, names, maxdeg, target_label=target)
    except red.NotInSpan as e:
        obj.emit({"ok": False, "residual": A.format(e.residual)},
                 f"NOT IN SPAN\nresidual: {A.format(e.residual)}")
        sys.exit(1)
    data = rel.to_json(A)
    text = "\n".join([f"{target} ="] + [f"  + ({t['coeff']}) * {t['element']}" for t in data["terms"]]
                     + [f"residual: {data['residual']}"])
    obj.emit(data, text)


@main.command()
@click.option("--weights", required=True, help="comma-separated generator weights")
@click.option("--truncate", "N", type=int, required=True)
@click.option("--sym3", is_flag=True, help="symmetric-cube character of the free algebra")
@click.option("--compare", "other", default=None, help="series literal or 'prod (q^a;q) ...'")
@click.pass_obj
def char(obj, weights, N, sym3, other):
    """Free (or symmetric-cube) character, optionally compared with another series."""
    try:
        ws = [int(w) for w in weights.split(",") if w.strip()]
        f = ch.free_character(ws, N)
    except ValueError as e:
        raise click.UsageError(str(e))
    if sym3:
        f = ch.sym_cube_character(f)
    payload = {"series": f.format(), "coefficients": [format_scalar(c) for c in f.coeffs]}
    text = f.format()
    if other:
        try:
            g = ch.parse_product(other, N) if other.strip().startswith("prod") else ch.parse_series(other, N)
        except ch.SeriesParseError as e:
            raise click.UsageError(str(e))
        d = ch.compare(f, g)
        if d is ch.EQUAL:
            payload["first_difference"] = None
            text += f"\nequal through q^{N}"
        else:
            payload["first_difference"] = d
            text += f"\nfirst difference at q^{d}: {f[d]} vs {g[d]}"
    obj.emit(payload, text)


@main.command()
@preset_opt
@param_opt
@click.option("--vector", required=True)
@click.option("--L", "L", default=None, help="conformal vector (default Ltot or L)")
@click.pass_obj
def singular(obj, preset, param, vector, L):
    """Is VECTOR singular (primary) for the conformal vector?"""
    A = obj.algebra(preset, param)
    v = _parse(A, vector)
    if L is None:
        Lv = A.state("Ltot", missing_ok=True)
        Lv = Lv if Lv is not None else A.gen("L")
    else:
        Lv = _parse(A, L)
    ok, wit = is_singular(A, v, Lv)
    w = A.weight(v)
    fails = {str(k): (A.format(r) if hasattr(r, "items") else str(r)) for k, r in wit.items()}
    obj.emit({"singular": ok, "weight": None if w is None else str(w), "failures": fails},
             f"PASS weight {w}" if ok else "FAIL\n" + "\n".join(f"  L({k}) v = {s}" for k, s in fails.items()))
    if not ok:
        sys.exit(1)


@main.command()
@preset_opt
@param_opt
@click.option("--max-weight", "maxw", type=int, default=None,
              help="also run commutator checks on states up to this weight")
@click.pass_obj
def consistency(obj, preset, param, maxw):
    """Skew-symmetry for all generator pairs, plus commutator identities."""
    A = obj.algebra(preset, param)
    gens = [A.gen(n) for n in A.names]
    failures = {}
    count = 0
    for i, a in enumerate(gens):
        for b in gens[i:]:
            rep = skew_check(A, a, b)
            count += 1
            for n, r in rep.failures().items():
                failures[f"skew {A.format(a)},{A.format(b)} n={n}"] = A.format(r)
    if maxw:
        vs = list(gens)
        for i, a in enumerate(gens):
            for b in gens[i:]:
                if A.weights[i] + A.weight(b) <= maxw:
                    vs.append(A.no(a, b))
        for a in gens:
            for b in gens:
                wa, wb = A.weight(a), A.weight(b)
                for v in vs:
                    for m in range(wa):
                        for n in range(wb):
                            rep = commutator_check(A, a, m, b, n, v)
                            count += 1
                            for k, r in rep.failures().items():
                                failures[f"comm {A.format(a)}_{m} {A.format(b)}_{n} on {A.format(v)}"] = A.format(r)
    ok = not failures
    text = f"{'PASS' if ok else 'FAIL'}: {count} checks, {len(failures)} failures"
    for k, r in failures.items():
        text += f"\n  {k}: {r}"
    obj.emit({"ok": ok, "checks": count, "failures": failures}, text)
    if not ok:
        sys.exit(1)


@main.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--only", multiple=True, help="run only these check ids")
@click.pass_obj
def run(obj, manifest, only):
    """Run a verification manifest."""
    try:
        results = run_manifest(manifest, threads=obj.threads, only=set(only) or None)
    except ManifestError as e:
        raise click.UsageError(str(e))
    failed = [r for r in results if not r.ok]
    lines = []
    for r in results:
        lines.append(f"{'PASS' if r.ok else 'FAIL'} {r.id} [{r.kind}] {r.detail} ({r.seconds}s)")
        if not r.ok and r.residual:
            lines.append(f"    residual: {r.residual}")
        for key, note in (r.blame or {}).items():
            lines.append(f"    {key}: {note}")
    lines.append(f"{len(results) - len(failed)} passed, {len(failed)} failed")
    obj.emit({"checks": [r.to_json() for r in results], "passed": len(results) - len(failed),
              "failed": len(failed)}, "\n".join(lines))
    if failed:
        sys.exit(1)


@main.command("manifests")
def list_manifests():
    """List the bundled manifests."""
    for p in bundled_manifests():
        click.echo(str(p))


if __name__ == "__main__":  # pragma: no cover
    main()
