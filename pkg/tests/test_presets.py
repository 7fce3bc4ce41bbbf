import json

import pytest

from vacalc.coeff import ETA, evaluate_at, mpq, to_scalar
from vacalc.engine import skew_check
from vacalc.presets import (
    COLLAPSING_LEVELS, PRESETS, UnknownPreset, algebra_from_json, algebra_to_json,
    build_g2_principal, build_g2_subregular, central_charge_prin, collapse_factor, fixtures,
    gen_C, gen_W, get_preset, principal_poly, z2_swap, z3_rotate,
)


def test_catalog():
    assert set(PRESETS) >= {"virasoro", "vinfty", "vinfty3", "virasoro3", "ising3", "g2sub", "g2prin"}
    with pytest.raises(UnknownPreset):
        get_preset("e8")
    assert get_preset("g2sub", "-16/5") is get_preset("g2sub", mpq(-16, 5))


@pytest.mark.parametrize("name", ["vinfty3", "ising", "g2_principal"])
def test_fixture_checksums_and_errata(name):
    raw = fixtures.load_raw(name)
    for dname in raw.get("displays", {}):
        d = fixtures.load_display(name, dname)
        assert d.terms
        assert fixtures.term_digest([t.__dict__ for t in fixtures.load_display(name, dname, False).terms]) \
            == raw["displays"][dname]["sha256"]


def test_perturbed_display_changes_one_coefficient():
    d = fixtures.load_display("vinfty3", "W10_0")
    p = d.perturbed(3, "1")
    diff = [i for i, (a, b) in enumerate(zip(d.terms, p.terms)) if a != b]
    assert diff == [3]


def test_vinfty3_generators():
    A = get_preset("vinfty3")
    assert A.format(A.nth_product(A.gen("T0"), 3, A.gen("T0"))) == "one"
    assert A.parse("W_2_0") == gen_W(A, 2, 0)
    assert A.parse("C_1_0_0") == gen_C(A, 1, 0, 0)
    assert A.weight(gen_C(A, 2, 1, 0)) == 9


@pytest.fixture(scope="module")
def ising():
    return get_preset("ising3")


def test_ising_basis(ising):
    A = ising
    total = A.parse("L1 + L2 + L3")
    assert total == A.parse("Ltot")
    assert A.nth_product(A.parse("Ltot"), 3, A.parse("Ltot")) == A.parse("3/4*one")


def test_S_family_weight_and_equivariance(ising):
    A = ising
    S, S1, S2 = (A.parse(n) for n in ("S", "S1", "S2"))
    for x in (S, S1, S2):
        assert A.weight(x) == 6
    assert z3_rotate(A, S) == S
    assert z3_rotate(A, S1) == S1 * ETA
    assert z3_rotate(A, S2) == S2 * ETA ** 2
    assert z2_swap(A, S) == S
    assert z2_swap(A, S1) == S2
    # the same pattern as L, U1, U2
    assert z3_rotate(A, A.gen("U1")) == A.gen("U1") * ETA


def test_S_family_built_from_singular_vectors(ising):
    A = ising
    s = to_scalar("128*sqrt3")
    assert A.parse("S") == A.parse("v1 + v2 + v3") * s
    assert A.parse("S1") == A.parse("v1 + eta*v2 + eta^2*v3") * s
    assert A.parse("S2") == A.parse("v1 + eta^2*v2 + eta*v3") * s


def test_S_display_verbatim_is_not_homogeneous():
    d = fixtures.load_display("ising", "S", apply_errata=False)
    A = get_preset("ising3")
    from vacalc.terms import MIXED
    assert A.weight(A.parse(d.rhs_source())) is MIXED


@pytest.mark.parametrize("name", ["Vp8", "Vm8", "Vp9", "Vm9", "Vp10", "Vm10", "Qp10", "Qm10"])
def test_z3_invariant_vectors_in_singular_ideal(ising, name):
    from vacalc.reduction import ideal_membership
    A = ising
    x = A.parse(name)
    assert z3_rotate(A, x) == x
    if name in ("Vp8", "Vm8", "Vp9"):
        gens = [A.parse(n) for n in ("S", "S1", "S2")]
        assert ideal_membership(A, x, gens, A.weight(x))[0]


def test_V_states_verbatim_not_invariant(ising):
    raw = fixtures.load_raw("ising")["states"]
    A = ising
    x = A.parse(raw["Vp8"])
    assert z3_rotate(A, x) != x


def test_collapse_factor_vanishes_at_listed_levels():
    assert len(COLLAPSING_LEVELS) == 12
    f = collapse_factor()
    for k in COLLAPSING_LEVELS:
        assert evaluate_at(f, k) == 0
    assert evaluate_at(f, mpq(-3)) != 0


def test_collapsing_levels_pair_by_central_charge():
    c = central_charge_prin()
    by_c = {}
    for k in COLLAPSING_LEVELS:
        by_c.setdefault(evaluate_at(c, k), []).append(k)
    assert sorted(map(len, by_c.values())) == [2] * 6
    assert sorted(by_c[mpq(-3, 5)]) == [mpq(-52, 15), mpq(-27, 8)]
    assert sorted(by_c[mpq(-46, 3)]) == [mpq(-65, 18), mpq(-22, 7)]


def test_principal_poly_verbatim_has_extra_factor():
    q1q2 = principal_poly("q1") * principal_poly("q2")
    for p in ("p3", "p5", "p7"):
        assert principal_poly(p, verbatim=True) == principal_poly(p) * q1q2


def test_g2_verbatim_tables_fail_skew():
    A = build_g2_subregular(mpq(7, 3), verbatim=True)
    bad = [(a, b) for a in A.names for b in A.names
           if not skew_check(A, A.gen(a), A.gen(b)).ok]
    assert bad
    B = build_g2_subregular(mpq(7, 3))
    assert all(skew_check(B, B.gen(a), B.gen(b)).ok for a in B.names for b in B.names)


def test_principal_verbatim_fails_WWW_commutator():
    from vacalc.engine import commutator_check
    A = build_g2_principal(mpq(-3), verbatim=True)
    W = A.gen("W")
    assert not all(commutator_check(A, W, m, W, n, W).ok for m in range(6) for n in range(6))


def test_json_roundtrip():
    A = get_preset("g2sub", "-16/5")
    data = json.loads(json.dumps(algebra_to_json(A)))
    B = algebra_from_json(data)
    G = A.gen("G")
    for n in range(6):
        assert B.parse(A.format(A.nth_product(G, n, G))) == B.nth_product(B.gen("G"), n, B.gen("G"))
