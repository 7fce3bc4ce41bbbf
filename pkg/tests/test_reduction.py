import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vacalc import reduction as red
from vacalc.coeff import mpq
from vacalc.presets import gen_C, get_preset
from vacalc.terms import Element


@pytest.fixture(scope="module")
def V3():
    return get_preset("vinfty3")


def test_spanning_set_small(V3):
    S = red.spanning_set(V3, ["T0"], 4, 2)
    assert S.labels == ["NO(T0, T0)", "NO(d^2(T0))"]


def test_express_roundtrip(V3):
    S = red.spanning_set(V3, ["T0", "T1"], 6, 3)
    x = S.elements[0] * 3 - S.elements[-1] * mpq(2, 7)
    coeffs = red.express(V3, x, S)
    back = sum((e * c for c, e in zip(coeffs, S.elements)), Element())
    assert back == x


def test_not_in_span_carries_residual(V3):
    with pytest.raises(red.NotInSpan) as e:
        red.decouple(V3, V3.parse("W_4_0"), ["W_0_0"], 2)
    assert e.value.residual


@given(st.lists(st.lists(st.integers(-6, 6), min_size=3, max_size=3), min_size=3, max_size=3))
@settings(max_examples=60, deadline=None)
def test_determinant_matches_cofactor_expansion(rows):
    (a, b, c), (d, e, f), (g, h, i) = rows
    want = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    assert red.determinant(rows) == want


def test_weight13_lhs_determinant():
    assert red.determinant([[3, 0, 42], [0, 27, 81], [13, 12, 30]]) == -15228


def test_w10_decouple_rederives_relation(V3):
    gens = [f"W_{m}_0" for m in range(9)] + [f"C_{m}_0_0" for m in range(8)]
    rel = red.decouple(V3, V3.parse("W_10_0"), gens, 3, target_label="W_10_0")
    assert not rel.residual
    assert len(rel.terms) == 25
    back = sum((e * c for c, _, e in rel.terms), Element())
    assert back == V3.parse("W_10_0")
    coeffs = {lab: c for c, lab, _ in rel.terms}
    assert coeffs["NO(d^2(W_8_0))"] == mpq(34423, 4518)
    data = rel.to_json(V3)
    assert data["target"] == "W_10_0" and data["residual"] == "0"


def test_w10_decouple_needs_cubic_terms(V3):
    gens = [f"W_{m}_0" for m in range(9)] + [f"C_{m}_0_0" for m in range(8)]
    with pytest.raises(red.NotInSpan):
        red.decouple(V3, V3.parse("W_10_0"), gens, 2)


def test_R1_leading_symbol_cancels_only_with_corrected_coefficient(V3):
    from vacalc.terms import degree
    m = (2, 1, 0, 0, 0)
    a = (1, 2, 3, 4, 5)
    good = red.build_R1(a, m, V3)
    bad = red.build_R1(a, m, V3, verbatim=True)
    # five-factor words cancel in the corrected relation
    assert degree(good) <= 3
    assert degree(bad) == 5


def test_R2_is_purely_cubic(V3):
    from vacalc.terms import degree
    for m in red.R2_TUPLES_C16[:3]:
        x = red.build_R2(m, V3)
        assert x and all(len(mono) == 3 for mono, _ in x.items())
        assert degree(x) == 3


def test_cubic_coordinates_example(V3):
    cc = red.cubic_coordinates(V3, red.build_R2((2, 1, 0, 0, 0), V3))
    assert cc == {(5, 2): mpq(-1, 30), (4, 3): mpq(-1, 12), (7, 0): mpq(-13, 360)}


def test_c16_cubic_solve():
    V3 = get_preset("vinfty3")
    b = red.solve_cubic(V3, (16, 0, 0))
    den = 168520823757097513517
    assert b[0] == mpq(1790484010217545392288, den)
    assert b[1] == mpq(1795809487559936088240, den)
    assert b[7] == mpq(-1464894501954686124462, den)


def test_c16_combination_exact_modulo_derivatives():
    V3 = get_preset("vinfty3")
    b = red.solve_cubic(V3, (16, 0, 0))
    x = gen_C(V3, 16, 0, 0)
    for c, m in zip(b, red.R2_TUPLES_C16):
        x = x - red.build_R2(m, V3) * c
    # every remaining term is a total derivative of a weight-21 cubic field
    s = 15
    gens = [f"C_{p}_{q}_{s - p - q}" for p in range(s, -1, -1) for q in range(min(p, s - p), -1, -1)
            if s - p - q <= q]
    rel = red.decouple(V3, x, gens, 1)
    assert not rel.residual


@pytest.mark.parametrize("lhs,s", [
    ("30*C_4_3_0 + 12*C_5_2_0 + 13*C_7_0_0", 6),
    ("30*C_4_2_0 + 79*C_6_0_0", 5),
])
def test_R2_relations_hold_modulo_derivatives_with_scale(V3, lhs, s):
    m = "R2_2_1_0_0_0" if s == 6 else "R2_1_1_0_0_0"
    gens = [f"C_{p}_{q}_{s - p - q}" for p in range(s, -1, -1) for q in range(min(p, s - p), -1, -1)
            if s - p - q <= q]
    red.decouple(V3, V3.parse(f"{lhs} + 360*{m}"), gens, 1)
    with pytest.raises(red.NotInSpan):
        red.decouple(V3, V3.parse(f"{lhs} - {m}"), gens, 1)


def test_primary_correction_of_descendants_and_primaries():
    A = get_preset("virasoro")
    L = A.gen("L")
    # :LL: is a vacuum descendant, so nothing primary is left
    assert not red.primary_correction(A, A.no(L, L), L)
    B = get_preset("virasoro", "1/2")
    v = B.parse("v1")
    assert red.primary_correction(B, v, B.gen("L")) == v


def test_primary_correction_ising_w4():
    A = get_preset("ising3")
    got = red.primary_correction(A, A.parse("W4t"), A.parse("Ltot"))
    assert got == A.parse("W4hat")
    assert A.format(got) == ("(-9/59*zeta + 9/118*zeta^3)*NO(d^2(L)) - 132/59*NO(L, L) + 3*NO(U1, U2)")


def test_match_coupling():
    lam, mu = red.match_coupling()
    assert (lam, mu) == (mpq(22, 2891), mpq(-1088, 343))
    with pytest.raises(red.NoSolution):
        red.match_coupling(verbatim=True)


def test_ideal_membership_g2_subregular():
    A = get_preset("g2sub", "-16/5")
    G = A.gen("G")
    L1, L2 = A.parse("L1"), A.parse("L2")
    poles = A.ope_singular(L1, L2)
    assert poles
    for p in poles:
        if p:
            assert red.ideal_membership(A, p, [G], A.weight(p))[0]
    ok, wit = red.ideal_membership(A, A.gen("L"), [G], 2)
    assert not ok and wit


def test_w14_decouples_over_even_W_with_cubic_terms(V3):
    gens = [f"W_{m}_0" for m in range(0, 13, 2)]
    with pytest.raises(red.NotInSpan):
        red.decouple(V3, V3.parse("W_14_0"), gens, 2)
    rel = red.decouple(V3, V3.parse("W_14_0"), gens, 3)
    assert len(rel.terms) == 64
    assert sum((e * c for c, _, e in rel.terms), Element()) == V3.parse("W_14_0")
