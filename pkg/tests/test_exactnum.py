from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from warpfield.exactnum import I, ONE, ZERO, GaussianRational, parse_rational

rats = st.fractions(max_denominator=50).filter(lambda q: abs(q.numerator) < 10**6)
gauss = st.builds(GaussianRational, rats, rats)


@pytest.mark.parametrize("text, expected", [
    ("3", Fraction(3)),
    ("-2/4", Fraction(-1, 2)),
    ("0/7", Fraction(0)),
    (" 10 / 5 ", Fraction(2)),
])
def test_parse_rational(text, expected):
    q = parse_rational(text)
    assert q == expected
    assert q.denominator > 0


def test_parse_rational_rejects():
    with pytest.raises(ZeroDivisionError):
        parse_rational("1/0")
    with pytest.raises(ValueError):
        parse_rational("1.5")


@pytest.mark.parametrize("text, re, im", [
    ("i", 0, 1),
    ("-i", 0, -1),
    ("1/2+3/4*i", Fraction(1, 2), Fraction(3, 4)),
    ("-2-i", -2, -1),
    ("5", 5, 0),
])
def test_gaussian_parse(text, re, im):
    assert GaussianRational.parse(text) == GaussianRational(re, im)


def test_i_squared():
    assert I * I == -ONE
    assert I ** 4 == ONE
    assert (I ** -1) == -I


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        ONE / ZERO


def test_str_forms():
    assert str(GaussianRational(Fraction(1, 2), -1)) == "1/2-i"
    assert str(GaussianRational(0, Fraction(-3, 2))) == "-3/2*i"
    assert str(ZERO) == "0"


def test_hash_matches_fraction():
    assert hash(GaussianRational(Fraction(3, 7))) == hash(Fraction(3, 7))
    assert GaussianRational(2) == 2


def test_float_complex_refused():
    with pytest.raises(TypeError):
        GaussianRational.coerce(1.5j)


@given(gauss, gauss, gauss)
def test_field_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a
    assert (a * b).conj() == a.conj() * b.conj()


@given(gauss, gauss)
def test_division_inverts(a, b):
    if b:
        assert (a / b) * b == a


@given(gauss)
def test_json_roundtrip(a):
    assert GaussianRational.from_json(a.to_json()) == a
    assert GaussianRational.parse(str(a)) == a


@given(gauss)
def test_abs2(a):
    assert a * a.conj() == GaussianRational(a.abs2())
