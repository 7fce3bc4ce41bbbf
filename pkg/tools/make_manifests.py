"""Regenerate the bundled verification manifests under src/vacalc/manifests/."""

import json
from math import comb
from pathlib import Path

from gmpy2 import mpq

OUT = Path(__file__).resolve().parent.parent / "src" / "vacalc" / "manifests"


def q(x):
    x = mpq(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def lin(terms):
    """[(coeff, expr)] -> element string, dropping zeros."""
    parts = [f"({q(c)})*{e}" for c, e in terms if c]
    return " + ".join(parts) or "0"


def W(a, b):
    return f"W_{a}_{b}"


def d(x, k):
    return x if k == 0 else f"d^{k}({x})"


def check(cid, kind, inputs, expected=None):
    out = {"id": cid, "kind": kind, "inputs": inputs}
    if expected is not None:
        out["expected"] = expected
    return out


def core():
    checks = [
        check("ope.T0T0.pole4", "ope-identity", {"a": "T0", "n": 3, "b": "T0"}, "one"),
        check("ope.T1T2.pole4", "ope-identity", {"a": "T1", "n": 3, "b": "T2"}, "one"),
        check("ope.T1T1.none", "ope-identity", {"a": "T1", "n": 3, "b": "T1"}, "0"),
        check("ope.T0T1.none", "ope-identity", {"a": "T0", "n": 3, "b": "T1"}, "0"),
    ]
    for a, b in [("T0", "T0"), ("T1", "T2"), ("W_0_0", "W_0_0"), ("W_0_0", "W_2_0"), ("W_1_1", "C_0_0_0")]:
        checks.append(check(f"skew.{a}.{b}", "skew", {"a": a, "b": b}, True))
    checks.append(check("comm.W00.W00.on.W20", "commutator",
                        {"a": "W_0_0", "b": "W_0_0", "v": "W_2_0", "m": [0, 1, 2, 3], "n": [0, 1, 2, 3]}, True))
    checks.append(check("comm.virasoro.L.L.on.LL", "commutator",
                        {"preset": "virasoro", "a": "L", "b": "L", "v": "NO(L, L)",
                         "m": [0, 1, 2, 3], "n": [0, 1, 2, 3]}, True))
    # nop1-nop3 through Virasoro normal ordering at symbolic c
    checks.append(check("nop.virasoro.LL.commute", "ope-identity",
                        {"preset": "virasoro",
                         "lhs": "NO(d(L), L) - NO(L, d(L))"}, "-1/6*d^3(L)"))
    checks.append(check("nop.virasoro.L1.LL", "ope-identity",
                        {"preset": "virasoro", "a": "L", "n": 1, "b": "NO(L, L)"}, "4*NO(L, L)"))
    checks.append(check("nop.virasoro.L3.LL", "ope-identity",
                        {"preset": "virasoro", "a": "L", "n": 3, "b": "NO(L, L)"}, "(c + 8)*L"))
    for p1 in range(4):
        for p2 in range(4):
            for m1 in range(4):
                for m2 in range(4):
                    s = mpq((-1) ** p1 + (-1) ** p2, 6)
                    e0 = lin([(s, W(p1 + p2 + m1 + 3, m2)), (s, W(p1 + p2 + m2 + 3, m1))])
                    checks.append(check(f"0prod.{p1}{p2}.{m1}{m2}", "ope-identity",
                                        {"a": W(p1, p2), "n": 0, "b": W(m1, m2)}, e0))
                    c1 = mpq((-1) ** p1 * (p1 + m1 + 3) + (-1) ** p2 * (p2 + m1 + 3), 6)
                    c2 = mpq((-1) ** p1 * (p1 + m2 + 3) + (-1) ** p2 * (p2 + m2 + 3), 6)
                    e1 = lin([(c1, W(p1 + p2 + m1 + 2, m2)), (c2, W(p1 + p2 + m2 + 2, m1))])
                    checks.append(check(f"1prod.{p1}{p2}.{m1}{m2}", "ope-identity",
                                        {"a": W(p1, p2), "n": 1, "b": W(m1, m2)}, e1))
    for a in range(9):
        e = lin([(mpq(a + 6, 3), W(a + 2, 0)), (-2, d(W(a + 1, 0), 1)), (1, d(W(a, 0), 2))])
        checks.append(check(f"00-1.a{a}", "ope-identity", {"a": "W_0_0", "n": 1, "b": W(a, 0)}, e))
    for k in range(2, 6):
        for a in range(5):
            acc = {}
            for j in range(k + 1):
                for i in range(2, j + 3):
                    c = mpq(comb(k, j) * (-1) ** ((j - i) % 2)
                            * ((a + k - j + 3) * comb(j, i) + (j + 3) * comb(j + 2, i)), 3)
                    key = (a + k + 2 - i, i)
                    acc[key] = acc.get(key, mpq(0)) + c
            e = lin([(c, d(W(m, 0), i)) for (m, i), c in sorted(acc.items())])
            checks.append(check(f"1prod-k.k{k}.a{a}", "ope-identity",
                                {"a": "W_0_0", "n": 1, "b": d(W(a, 0), k)}, e))
    return {"name": "core", "defaults": {"preset": "vinfty3"}, "checks": checks}


C13 = ["C_6_0_0", "C_5_1_0", "C_4_2_0", "C_4_1_1", "C_3_3_0", "C_3_2_1", "C_2_2_2"]
C12 = ["C_5_0_0", "C_4_1_0", "C_3_2_0", "C_3_1_1", "C_2_2_1"]

W13A = ("3*C_7_0_0 + 42*C_4_3_0 - 28*d(C_3_3_0) - (14*d(C_6_0_0) - 252*d^2(C_3_2_0)"
        " + 42*d^3(C_2_2_0) - 77*d^4(C_3_0_0) + 84*d^5(C_2_0_0) - 6*d^7(C_0_0_0))")
W13B = ("27*C_5_2_0 + 81*C_4_3_0 - 24*d(C_3_3_0) - (12*d(C_6_0_0) - 351*d^2(C_3_2_0)"
        " + 81*d^3(C_2_2_0) - 96*d^4(C_3_0_0) + 108*d^5(C_2_0_0) - 8*d^7(C_0_0_0))")
W13C = "30*C_4_3_0 + 12*C_5_2_0 + 13*C_7_0_0"
W12 = "30*C_4_2_0 + 79*C_6_0_0"
W12D = "9*d^2(C_4_0_0) - 18*d^2(C_2_2_0) - 24*d^3(C_3_0_0) + 18*d^4(C_2_0_0) - d^6(C_0_0_0)"
W11 = "30*C_3_2_0 - (3*C_5_0_0 - 15*d^2(C_3_0_0) + 15*d^3(C_2_0_0) - d^5(C_0_0_0))"
W10 = "18*C_2_2_0 - (9*C_4_0_0 - 24*d(C_3_0_0) + 18*d^2(C_2_0_0) - d^4(C_0_0_0))"

B1 = "1790484010217545392288/168520823757097513517"
B2 = "1795809487559936088240/168520823757097513517"
B8 = "-1464894501954686124462/168520823757097513517"


def heavy():
    w8 = [W(m, 0) for m in range(0, 9)]
    c7 = [f"C_{m}_0_0" for m in range(0, 8)]
    checks = [
        check("w10.display", "ope-identity", {"lhs": "W_10_0"}, "@W10_0"),
        check("w10.decouple", "decouple", {"target": "W_10_0", "gens": w8 + c7, "maxdeg": 3}, "ok"),
        check("w12.display", "ope-identity", {"lhs": "W_12_0"}, "@W12_0"),
        check("w13.rel1", "ope-identity", {"lhs": W13A}, "0"),
        check("w13.rel2", "ope-identity", {"lhs": W13B}, "0"),
        check("w13.rel3.mod-derivatives", "decouple",
              {"target": f"{W13C} + 360*R2_2_1_0_0_0", "gens": C13, "maxdeg": 1}, "ok"),
        check("w13.det", "determinant", {"rows": [[3, 0, 42], [0, 27, 81], [13, 12, 30]]}, "-15228"),
        check("w12.C420.mod-derivatives", "decouple",
              {"target": f"{W12} + 360*R2_1_1_0_0_0", "gens": C12, "maxdeg": 1}, "ok"),
        check("w12.pure-derivative", "ope-identity", {"lhs": W12D}, "0"),
        check("w11.C320", "ope-identity", {"lhs": W11}, "0"),
        check("w10.C220", "ope-identity", {"lhs": W10}, "0"),
        check("c16.R2", "decouple", {"method": "cubic-R2", "target": [16, 0, 0]},
              {"b1": B1, "b2": B2, "b8": B8}),
        check("char.sym3.vs.free", "character",
              {"sym3_of": [2], "truncate": 13,
               "product": "prod (q^2;q) (q^4;q) (q^6;q)^2 (q^8;q)^2 (q^9;q) (q^10;q)^2 (q^11;q) (q^12;q)^3"},
              {"first_difference": 12}),
    ]
    return {"name": "heavy", "defaults": {"preset": "vinfty3"}, "checks": checks}


def ising():
    prod = "-231/118*W4hat + 18522/3481*NO(Ltot, Ltot) - 6615/13924*d^2(Ltot)"
    checks = [check(f"v{i}.singular", "singular", {"vector": f"v{i}"}, True) for i in (1, 2, 3)]
    checks += [
        check("v1.singular.own-copy", "singular", {"vector": "v1", "L": "L1"}, True),
        check("C6p.relation", "ope-identity", {"lhs": "128*Cp6"}, "@C6p_relation"),
        check("S.from-singular-vectors", "ope-identity", {"lhs": "@S"}, "128*sqrt3*(v1 + v2 + v3)"),
        check("S1.from-singular-vectors", "ope-identity", {"lhs": "@S1"},
              "128*sqrt3*(v1 + eta*v2 + eta^2*v3)"),
        check("S2.from-singular-vectors", "ope-identity", {"lhs": "@S2"},
              "128*sqrt3*(v1 + eta^2*v2 + eta*v3)"),
        check("W4hat.primary", "primary", {"x": "W4t", "L": "Ltot"}, "W4hat"),
        # the display is written with W4 = W4t and L = Ltot
        check("W4hat.primary.display", "primary",
              {"x": "W4t", "L": "Ltot",
               "rename": {"fixture": "ising", "displays": ["W4hat_over_mu"],
                          "map": {"W4": "W4t", "L": "Ltot"}}},
              "@W4hat_over_mu"),
        check("W4hat.singular", "singular", {"vector": "W4hat"}, True),
        check("W4hat.product", "ope-identity", {"a": "W4hat", "n": 3, "b": "W4hat"}, prod),
        check("coupling", "coupling", {}, ["22/2891", "-1088/343"]),
    ]
    return {"name": "ising", "defaults": {"preset": "ising3"}, "checks": checks}


def g2():
    checks = []
    gens = ["L", "E", "F", "G"]
    for kv in (None, "-16/5"):
        tag = "k" if kv is None else kv
        for i, a in enumerate(gens):
            for b in gens[i:]:
                inp = {"preset": "g2sub", "a": a, "b": b}
                if kv:
                    inp["param"] = kv
                checks.append(check(f"sub.skew.{tag}.{a}{b}", "skew", inp, True))
    for i in (1, 2, 3):
        checks.append(check(f"sub.L{i}.pole4", "ope-identity",
                            {"preset": "g2sub", "param": "-16/5", "a": f"L{i}", "n": 3, "b": f"L{i}"},
                            "-11/5*one"))
        for j in (1, 2, 3):
            if i == j:
                continue
            for n in range(4):
                checks.append(check(f"sub.ideal.L{i}L{j}.n{n}", "ideal",
                                    {"preset": "g2sub", "param": "-16/5", "a": f"L{i}", "n": n,
                                     "b": f"L{j}", "ideal": ["G"]}, True))
    checks.append(check("sub.ideal.L.not-member", "ideal",
                        {"preset": "g2sub", "param": "-16/5", "x": "L", "ideal": ["G"]}, False))
    for kv in ("-3", "-67/21"):
        base = {"preset": "g2prin", "param": kv}
        checks.append(check(f"prin.{kv}.WW10", "ope-identity", {**base, "a": "W", "n": 10, "b": "W"}, "0"))
        checks.append(check(f"prin.{kv}.skew.WW", "skew", {**base, "a": "W", "b": "W"}, True))
        checks.append(check(f"prin.{kv}.skew.LW", "skew", {**base, "a": "L", "b": "W"}, True))
        checks.append(check(f"prin.{kv}.comm.LWW", "commutator",
                            {**base, "a": "L", "b": "W", "v": "W", "m": [0, 1, 2, 3], "n": list(range(6))}, True))
    base = {"preset": "g2prin", "param": "-65/18"}
    tc = {
        "1": ("p4*Lambda3", "V8"),
        "2": ("p4*Lambda2", "1/2*d(V8)"),
        "3": ("p6*Lambda1", "81/820*d^2(V8) + 78/205*NO(L, V8)"),
        "4": ("p6*Lambda0", "-15/41*NO(d(L), V8) + 27/82*NO(L, d(V8))"),
    }
    for k, (lhs, rhs) in tc.items():
        checks.append(check(f"prin.collapse-identity.{k}", "ope-identity", {**base, "lhs": lhs}, rhs))
    checks.append(check("prin.V8.singular", "singular", {**base, "vector": "V8", "L": "L"}, True))
    return {"name": "g2", "defaults": {}, "checks": checks}


def verbatim_forms():
    """Forms taken verbatim; every check here is expected to fail."""
    checks = [
        check("w13.rel3.verbatim", "ope-identity",
              {"preset": "vinfty3", "lhs": f"{W13C} - R2_2_1_0_0_0"}, "0"),
        check("w12.C420.verbatim", "ope-identity",
              {"preset": "vinfty3", "lhs": f"{W12} - R2_1_1_0_0_0"}, "0"),
        check("char.agree-through-12", "character",
              {"sym3_of": [2], "truncate": 13,
               "product": "prod (q^2;q) (q^4;q) (q^6;q)^2 (q^8;q)^2 (q^9;q) (q^10;q)^2 (q^11;q) (q^12;q)^3"},
              {"first_difference": 13}),
        check("W4hat.product.18552", "ope-identity",
              {"preset": "ising3", "a": "W4hat", "n": 3, "b": "W4hat"},
              "-231/118*W4hat + 18552/3481*NO(Ltot, Ltot) - 6615/13924*d^2(Ltot)"),
        check("coupling.with-factor-2", "coupling", {"verbatim": True}, ["22/2891", "-1088/343"]),
        check("sub.L1.pole4.half", "ope-identity",
              {"preset": "g2sub", "param": "-16/5", "a": "L1", "n": 3, "b": "L1"}, "-11/10*one"),
        check("prin.collapse-identity.2.verbatim", "ope-identity",
              {"preset": "g2prin", "param": "-65/18", "lhs": "p4*Lambda2"}, "d(V8)"),
    ]
    return {"name": "verbatim-forms", "defaults": {}, "checks": checks}


def negative():
    return {"name": "negative-control", "defaults": {"preset": "vinfty3"}, "checks": [
        check("w10.display.perturbed", "ope-identity",
              {"lhs": "W_10_0", "perturb": {"fixture": "vinfty3", "display": "W10_0", "index": 0, "delta": "1"}},
              "@W10_0"),
    ]}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, fn in [("core", core), ("heavy", heavy), ("ising", ising),
                     ("g2", g2), ("verbatim-forms", verbatim_forms), ("negative-control", negative)]:
        (OUT / f"{name}.json").write_text(json.dumps(fn(), indent=1) + "\n")
        print(name, len(fn()["checks"]))


if __name__ == "__main__":
    main()
