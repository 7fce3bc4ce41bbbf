import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vacalc.characters import (
    EQUAL, QSeries, SeriesParseError, brute_force_sym_cube, compare, free_character,
    parse_product, parse_series, product_string, sym_cube_character, weights_of_product,
)
from vacalc.coeff import mpq

PRODUCT = "prod (q^2;q) (q^4;q) (q^6;q)^2 (q^8;q)^2 (q^9;q) (q^10;q)^2 (q^11;q) (q^12;q)^3"

weight_lists = st.lists(st.integers(1, 6), min_size=1, max_size=4)


@given(weight_lists, weight_lists)
@settings(max_examples=40, deadline=None)
def test_free_character_multiplicative(a, b):
    N = 12
    assert free_character(a + b, N) == free_character(a, N) * free_character(b, N)


@given(st.lists(st.integers(-5, 5), min_size=1, max_size=8))
@settings(max_examples=40, deadline=None)
def test_inverse(coeffs):
    coeffs[0] = 1
    f = QSeries(coeffs, 10)
    assert f * f.inverse() == QSeries.one(10)


def test_partition_numbers():
    assert free_character([1], 10).integers() == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]


def test_sym_cube_matches_orbit_count():
    assert brute_force_sym_cube(2, 8) == [1, 0, 1, 1, 3, 3, 8, 9, 19]
    assert sym_cube_character(free_character([2], 8)).integers() == [1, 0, 1, 1, 3, 3, 8, 9, 19]
    assert sym_cube_character(free_character([1], 7)).integers() == brute_force_sym_cube(1, 7)


@given(weight_lists)
@settings(max_examples=30, deadline=None)
def test_sym_cube_bounded_by_cube(w):
    f = free_character(w, 10)
    s, c = sym_cube_character(f), f ** 3
    assert s.is_integral()
    assert all(s[n] <= c[n] for n in range(11))


def test_sym_cube_vs_strong_generators():
    a = sym_cube_character(free_character([2], 13))
    b = parse_product(PRODUCT, 13)
    n = compare(a, b)
    assert n == 12
    assert (a[12], b[12]) == (107, 108)
    assert compare(a.truncate(11), b.truncate(11)) is EQUAL


def test_series_parse_and_format():
    s = parse_series("1 + q^2 + q^3 + 2q^4 - 3/2*q^5")
    assert s[4] == 2 and s[5] == mpq(-3, 2) and s[1] == 0
    assert parse_series(s.format()) == s
    assert free_character([2], 6).format() == "1 + q^2 + q^3 + 2q^4 + 2q^5 + 4q^6"


def test_product_roundtrip():
    w = weights_of_product(PRODUCT)
    assert sorted(w) == [2, 4, 6, 6, 8, 8, 9, 10, 10, 11, 12, 12, 12]
    assert weights_of_product(product_string(w)) == sorted(w)


@pytest.mark.parametrize("bad", ["", "1 + x^2", "q^^2", "1 + + q"])
def test_series_parse_errors(bad):
    with pytest.raises(SeriesParseError):
        parse_series(bad)


def test_product_parse_error():
    with pytest.raises(SeriesParseError):
        parse_product("prod (q^2;q) junk", 5)
