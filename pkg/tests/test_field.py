from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fractile.field import FieldScalar, FieldError, Point, format_scalar, parse_scalar, scalar


def s2(a, b):
    return scalar(a, b, 2)


def test_unit_norm_product():
    # (1+√2)(−1+√2) = 1
    assert s2(1, 1) * s2(-1, 1) == scalar(1)


def test_sign_of_three_minus_two_root_two():
    # 3² = 9 > 8 = (2√2)², so 3 − 2√2 > 0
    assert s2(3, -2).sign() == 1
    assert s2(3, -2).approx() > 0


def test_unit_inverse():
    assert s2(1, 1).inverse() == s2(-1, 1)


def test_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        scalar(1) / scalar(0)


def test_rational_normalization():
    x = scalar(3, 0, 7)
    assert x.d == 1
    assert x + s2(0, 1) == s2(3, 1)


def test_mixed_fields_rejected():
    with pytest.raises(FieldError):
        _ = s2(1, 1) + scalar(0, 1, 3)


def test_square_free_required():
    with pytest.raises(FieldError):
        scalar(1, 1, 4)


def test_exact_sqrt():
    assert scalar(Fraction(9, 4)).sqrt() == scalar(Fraction(3, 2))
    assert scalar(2).sqrt() is None
    assert scalar(0, 1, 2).sqrt() is None
    two = s2(0, 1) * s2(0, 1)
    assert two == scalar(2)
    # (1+√2)² = 3+2√2
    assert s2(3, 2).sqrt() == s2(1, 1)
    assert scalar(0, 2, 2).sqrt() is None or (scalar(0, 2, 2).sqrt() ** 2) == scalar(0, 2, 2)


rationals = st.fractions(min_value=-10**6, max_value=10**6, max_denominator=10**3)


@st.composite
def field_elements(draw, d=2):
    return scalar(draw(rationals), draw(rationals), d)


@given(field_elements(), field_elements(), field_elements())
@settings(max_examples=200)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x + y == y + x
    assert x * y == y * x
    if y != scalar(0):
        assert (x / y) * y == x


@given(field_elements(d=2))
@settings(max_examples=500)
def test_sign_matches_high_precision(x):
    approx = x.approx(digits=50)
    if approx == 0:
        assert x.sign() == 0 or x == scalar(0)
    else:
        assert x.sign() == (1 if approx > 0 else -1)


@given(st.integers(-100, 100), st.integers(-100, 100))
def test_sign_total_order(pn, qn):
    x, y = s2(pn, qn), s2(qn, pn)
    assert (x < y) == ((x - y).sign() < 0)
    assert not (x < y and y < x)


def test_sign_bulk_random():
    import random

    rng = random.Random(7)
    for _ in range(10_000):
        a = Fraction(rng.randint(-999, 999), rng.randint(1, 99))
        b = Fraction(rng.randint(-999, 999), rng.randint(1, 99))
        x = scalar(a, b, 2)
        hp = x.approx(digits=45)
        expected = 0 if hp == 0 else (1 if hp > 0 else -1)
        assert x.sign() == expected


@given(field_elements(d=2))
def test_format_parse_roundtrip(x):
    assert parse_scalar(format_scalar(x), d=2) == x


def test_parse_forms():
    assert parse_scalar("3") == scalar(3)
    assert parse_scalar("-1/2") == scalar(Fraction(-1, 2))
    assert parse_scalar("1/2+3/4√2") == scalar(Fraction(1, 2), Fraction(3, 4), 2)
    assert parse_scalar("-√2") == scalar(0, -1, 2)
    assert parse_scalar("√2") == scalar(0, 1, 2)
    assert parse_scalar("1-√2") == scalar(1, -1, 2)
    with pytest.raises(FieldError):
        parse_scalar("1+2√x")
    with pytest.raises(FieldError):
        parse_scalar("")
    with pytest.raises(FieldError):
        parse_scalar("1+1√3", d=2)


def test_point_ops():
    p = Point.of(1, 2)
    q = Point.of(3, 5)
    assert (q - p).as_floats() == (2.0, 3.0)
    assert p.cross(q) == scalar(-1)
    assert (p + q).dot(p) == scalar(4 + 14)
